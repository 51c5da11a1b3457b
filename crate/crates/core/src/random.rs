//! Seeded random automata and projects for property tests and the acceptance
//! corpus.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automata::{trim, Alphabet, Automaton, AutomatonBuilder, Event, EventRegistry};
use crate::project::Project;

/// Declares `n` events named `e0..` with controllability drawn with
/// probability `p_controllable`; at least one of each kind when `n >= 2`.
pub fn random_events<R: Rng>(rng: &mut R, n: usize, p_controllable: f64) -> (EventRegistry, Vec<Event>) {
    let mut kinds: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_controllable)).collect();
    if n >= 2 {
        kinds[0] = true;
        kinds[1] = false;
        kinds.shuffle(rng);
    }
    let mut reg = EventRegistry::new();
    let events = kinds
        .iter()
        .enumerate()
        .map(|(i, &c)| reg.declare(&format!("e{i}"), c, "<random>").expect("fresh names"))
        .collect();
    (reg, events)
}

/// Random deterministic automaton over `events` with `states` states, each
/// reachable from state 0 along a spanning tree, plus `extra` further random
/// transitions. Each state is marked with probability `p_marked`.
pub fn random_automaton<R: Rng>(
    rng: &mut R,
    name: &str,
    events: &[Event],
    states: usize,
    extra: usize,
    p_marked: f64,
) -> Automaton {
    assert!(!events.is_empty() && states >= 1);
    let mut b = AutomatonBuilder::new(name, events.iter().collect::<Alphabet>());
    for _ in 0..states {
        b.add_state(rng.gen_bool(p_marked));
    }
    b.set_initial(0);
    let mut used = vec![Vec::<Event>::new(); states];
    let mut add = |b: &mut AutomatonBuilder, rng: &mut R, src: usize, dst: usize| {
        let free: Vec<Event> = events.iter().copied().filter(|e| !used[src].contains(e)).collect();
        if let Some(&e) = free.choose(rng) {
            used[src].push(e);
            b.add_transition(src, e, dst).expect("fresh event at src");
            true
        } else {
            false
        }
    };
    for q in 1..states {
        // State q - 1 has no outgoing transition yet, so some parent fits.
        let mut parents: Vec<usize> = (0..q).collect();
        parents.shuffle(rng);
        let mut placed = false;
        for p in parents {
            if add(&mut b, rng, p, q) {
                placed = true;
                break;
            }
        }
        assert!(placed);
    }
    for _ in 0..extra {
        let (src, dst) = (rng.gen_range(0..states), rng.gen_range(0..states));
        add(&mut b, rng, src, dst);
    }
    b.build().expect("valid by construction")
}

/// Random non-empty trim automaton; retries until trimming leaves a state.
pub fn random_trim<R: Rng>(rng: &mut R, name: &str, events: &[Event], max_states: usize) -> Automaton {
    loop {
        let n = rng.gen_range(1..=max_states);
        let extra = rng.gen_range(0..=n);
        let a = trim(&random_automaton(rng, name, events, n, extra, 0.35));
        if !a.is_empty() {
            return a;
        }
    }
}

/// A plant of at most 8 states and a specification of at most 6 states over
/// at most 5 events with mixed controllability.
pub fn random_plant_spec<R: Rng>(rng: &mut R) -> (EventRegistry, Automaton, Automaton) {
    let n_events = rng.gen_range(2..=5);
    let (reg, events) = random_events(rng, n_events, 0.5);
    let ps = rng.gen_range(1..=8);
    let extra = rng.gen_range(0..=2 * ps);
    let plant = random_automaton(rng, "G", &events, ps, extra, 0.5);
    let ss = rng.gen_range(1..=6);
    let spec_events = random_subset(rng, &events, 1);
    let extra = rng.gen_range(0..=2 * ss);
    let spec = random_automaton(rng, "E", &spec_events, ss, extra, 0.5);
    (reg, plant, spec)
}

fn random_subset<R: Rng>(rng: &mut R, pool: &[Event], min: usize) -> Vec<Event> {
    let k = rng.gen_range(min.min(pool.len())..=pool.len());
    let mut s: Vec<Event> = pool.choose_multiple(rng, k).copied().collect();
    s.sort();
    s
}

/// 2–6 components of at most 6 states and 2–5 specifications of at most 4
/// states. Specification events are drawn from component events; every
/// component keeps its initial state marked so it is never trivially empty.
pub fn random_project<R: Rng>(rng: &mut R) -> Project {
    let n_comp = rng.gen_range(2..=6);
    let n_spec = rng.gen_range(2..=5);
    let n_events = rng.gen_range(n_comp + 1..=2 * n_comp + 2);
    let (reg, events) = random_events(rng, n_events, 0.75);
    // Every event belongs to at least one component.
    let mut comp_events: Vec<Vec<Event>> = (0..n_comp).map(|_| Vec::new()).collect();
    for (i, &e) in events.iter().enumerate() {
        comp_events[i % n_comp].push(e);
    }
    for ce in comp_events.iter_mut() {
        if rng.gen_bool(0.5) {
            let e = *events.choose(rng).expect("events");
            if !ce.contains(&e) {
                ce.push(e);
            }
        }
        ce.sort();
    }
    let components: Vec<Automaton> = comp_events
        .iter()
        .enumerate()
        .map(|(i, ce)| {
            let n = rng.gen_range(1..=6);
            let extra = rng.gen_range(n..=2 * n);
            let a = random_automaton(rng, &format!("G{i}"), ce, n, extra, 0.5);
            mark_initial(a)
        })
        .collect();
    let specs = (0..n_spec)
        .map(|j| {
            let k = rng.gen_range(1..=3usize.min(events.len()));
            let mut se: Vec<Event> = events.choose_multiple(rng, k).copied().collect();
            se.sort();
            let n = rng.gen_range(1..=4);
            let extra = rng.gen_range(n..=2 * n);
            let a = random_automaton(rng, &format!("E{j}"), &se, n, extra, 0.6);
            mark_initial(a)
        })
        .collect();
    Project {
        registry: reg,
        components,
        specs,
    }
}

fn mark_initial(a: Automaton) -> Automaton {
    let mut b = AutomatonBuilder::new(a.name(), a.alphabet().clone());
    for q in 0..a.num_states() {
        b.add_state(a.is_marked(q) || a.initial() == Some(q));
    }
    if let Some(q0) = a.initial() {
        b.set_initial(q0);
    }
    for (q, e, r) in a.transitions() {
        b.add_transition(q, e, r).expect("copied");
    }
    b.build().expect("copied")
}

/// Random observable subset of the alphabet of `a`.
pub fn random_observable<R: Rng>(rng: &mut R, a: &Automaton) -> Alphabet {
    a.alphabet().iter().filter(|_| rng.gen_bool(0.5)).collect()
}
