//! Natural-observer abstraction of cluster automata.
//!
//! A projection `P` onto `observable` is an `Lm(a)`-observer when every
//! projected continuation that leads into `P(Lm(a))` after `P(s)` can be
//! realized by an actual continuation of `s`. For a trim deterministic `a`
//! this is a state property: all states reached by strings with the same
//! projection must have the same projected marked future. The check below
//! computes those futures by subset construction from every state, merges
//! language-equivalent futures by partition refinement, and compares classes
//! inside every subset reached by the projected automaton.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::automata::{
    check_observable, is_nonblocking, natural_projection, trim, Alphabet, Automaton, Event, StateId, SubsetDfa,
};
use crate::error::{Error, Result};

/// `cluster_alphabet ∩ ⋃ external_alphabets`.
pub fn interface_alphabet<'a, I>(cluster_alphabet: &Alphabet, external_alphabets: I) -> Alphabet
where
    I: IntoIterator<Item = &'a Alphabet>,
{
    let externals = external_alphabets
        .into_iter()
        .fold(Alphabet::new(), |acc, a| acc.union(a));
    cluster_alphabet.intersection(&externals)
}

/// Evidence that a projection is not an observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverWitness {
    /// A string reaching the state that cannot follow `continuation`.
    pub prefix: Vec<Event>,
    /// That state, numbered as in the automaton under test.
    pub state: StateId,
    /// Projected continuation with `P(prefix)·continuation ∈ P(Lm)` that no
    /// extension of `prefix` realizes.
    pub continuation: Vec<Event>,
    /// A string with the same projection as `prefix` whose state can follow
    /// `continuation`.
    pub other_prefix: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverVerdict {
    pub holds: bool,
    pub witness: Option<ObserverWitness>,
}

pub fn is_natural_observer(a: &Automaton, observable: &Alphabet) -> Result<ObserverVerdict> {
    check_observable(a, observable)?;
    let t = trim(a);
    let Some(q0) = t.initial() else {
        return Ok(ObserverVerdict {
            holds: true,
            witness: None,
        });
    };

    let mut dfa = SubsetDfa::new(&t, observable);
    let root = dfa.explore(&[q0]);
    let future: Vec<usize> = (0..t.num_states()).map(|x| dfa.explore(&[x])).collect();
    let class = refine(&dfa);

    // Subsets reachable under the projection of Lm(t).
    let mut seen = vec![false; dfa.subsets.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(d) = queue.pop_front() {
        let members = &dfa.subsets[d];
        let first = class[future[members[0]]];
        if let Some(&y) = members.iter().find(|&&y| class[future[y]] != first) {
            let x = members[0];
            let witness = build_witness(&t, &dfa, root, d, x, y, &future, a);
            return Ok(ObserverVerdict {
                holds: false,
                witness: Some(witness),
            });
        }
        for &(_, r) in &dfa.delta[d] {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    Ok(ObserverVerdict {
        holds: true,
        witness: None,
    })
}

/// Moore refinement of the subset automaton; missing transitions lead to an
/// implicit dead state that differs from every subset (all subsets of a trim
/// automaton have a nonempty marked future).
fn refine(dfa: &SubsetDfa<'_>) -> Vec<usize> {
    let n = dfa.subsets.len();
    let mut class: Vec<usize> = dfa.marked.iter().map(|&m| usize::from(m)).collect();
    let mut count = class.iter().collect::<HashSet<_>>().len();
    loop {
        let mut ids: HashMap<(usize, Vec<(Event, usize)>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|d| {
                let sig = (class[d], dfa.delta[d].iter().map(|&(e, r)| (e, class[r])).collect());
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let new_count = ids.len();
        class = next;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}

#[allow(clippy::too_many_arguments)]
fn build_witness(
    t: &Automaton,
    dfa: &SubsetDfa<'_>,
    root: usize,
    target: usize,
    x: StateId,
    y: StateId,
    future: &[usize],
    original: &Automaton,
) -> ObserverWitness {
    // Distinguishing projected string between the futures of x and y,
    // extended until it lies in exactly one of them.
    let (mut cont, fx, fy) = distinguish(dfa, future[x], future[y]);
    let (lacking, other, live) = match (fx, fy) {
        (Some(u), Some(v)) if dfa.marked[u] != dfa.marked[v] => {
            if dfa.marked[u] {
                (y, x, None)
            } else {
                (x, y, None)
            }
        }
        (Some(u), _) => (y, x, Some(u)),
        (_, Some(v)) => (x, y, Some(v)),
        (None, None) => unreachable!("distinguishing walk ended on two dead states"),
    };
    if let Some(d) = live {
        cont.extend(path_to_marked(dfa, d));
    }
    let prefix = prefix_to(t, dfa, root, target, lacking);
    let projected: Vec<Event> = prefix.iter().copied().filter(|&e| dfa.observes(e)).collect();
    let other_prefix = prefix_with_projection(t, dfa, &projected, other);
    let state = original
        .run(&prefix)
        .expect("witness prefix runs in the original automaton");
    ObserverWitness {
        prefix,
        state,
        continuation: cont,
        other_prefix,
    }
}

/// Shortest string on which the subset automaton started at `u` and at `v`
/// disagree on liveness or marking, with the states reached.
fn distinguish(dfa: &SubsetDfa<'_>, u: usize, v: usize) -> (Vec<Event>, Option<usize>, Option<usize>) {
    type Node = (Option<usize>, Option<usize>);
    let start: Node = (Some(u), Some(v));
    let mut nodes = vec![start];
    let mut parent: Vec<Option<(usize, Event)>> = vec![None];
    let mut seen: HashSet<Node> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (a, b) = nodes[i];
        let differs = a.is_some() != b.is_some() || a.zip(b).is_some_and(|(a, b)| dfa.marked[a] != dfa.marked[b]);
        if differs {
            let mut trace = Vec::new();
            let mut j = i;
            while let Some((up, e)) = parent[j] {
                trace.push(e);
                j = up;
            }
            trace.reverse();
            return (trace, a, b);
        }
        let mut events: Vec<Event> = a
            .into_iter()
            .chain(b)
            .flat_map(|d| dfa.delta[d].iter().map(|&(e, _)| e))
            .collect();
        events.sort_unstable();
        events.dedup();
        for e in events {
            let next = (a.and_then(|d| dfa.step(d, e)), b.and_then(|d| dfa.step(d, e)));
            if seen.insert(next) {
                nodes.push(next);
                parent.push(Some((i, e)));
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    unreachable!("futures in different classes must be distinguishable")
}

fn path_to_marked(dfa: &SubsetDfa<'_>, from: usize) -> Vec<Event> {
    let mut parent: HashMap<usize, (usize, Event)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = HashSet::from([from]);
    while let Some(d) = queue.pop_front() {
        if dfa.marked[d] {
            let mut trace = Vec::new();
            let mut j = d;
            while let Some(&(up, e)) = parent.get(&j) {
                trace.push(e);
                j = up;
            }
            trace.reverse();
            return trace;
        }
        for &(e, r) in &dfa.delta[d] {
            if seen.insert(r) {
                parent.insert(r, (d, e));
                queue.push_back(r);
            }
        }
    }
    unreachable!("every subset of a trim automaton reaches a marked subset")
}

/// Shortest string reaching `state` of `t` while the projection sits in
/// subset `target`.
fn prefix_to(t: &Automaton, dfa: &SubsetDfa<'_>, root: usize, target: usize, state: StateId) -> Vec<Event> {
    let start = (t.initial().expect("non-empty"), root);
    let mut parent: HashMap<(StateId, usize), ((StateId, usize), Event)> = HashMap::new();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == (state, target) {
            let mut trace = Vec::new();
            let mut j = node;
            while let Some(&(up, e)) = parent.get(&j) {
                trace.push(e);
                j = up;
            }
            trace.reverse();
            return trace;
        }
        let (q, d) = node;
        for &(e, r) in t.transitions_from(q) {
            let next_d = if dfa.observes(e) {
                match dfa.step(d, e) {
                    Some(nd) => nd,
                    None => continue,
                }
            } else {
                d
            };
            let next = (r, next_d);
            if seen.insert(next) {
                parent.insert(next, (node, e));
                queue.push_back(next);
            }
        }
    }
    unreachable!("every member of a reachable subset is reachable with its projection")
}

/// Shortest string with projection `projected` reaching `state`.
fn prefix_with_projection(t: &Automaton, dfa: &SubsetDfa<'_>, projected: &[Event], state: StateId) -> Vec<Event> {
    let start = (t.initial().expect("non-empty"), 0usize);
    let mut parent: HashMap<(StateId, usize), ((StateId, usize), Event)> = HashMap::new();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == (state, projected.len()) {
            let mut trace = Vec::new();
            let mut j = node;
            while let Some(&(up, e)) = parent.get(&j) {
                trace.push(e);
                j = up;
            }
            trace.reverse();
            return trace;
        }
        let (q, i) = node;
        for &(e, r) in t.transitions_from(q) {
            let next = if !dfa.observes(e) {
                (r, i)
            } else if projected.get(i) == Some(&e) {
                (r, i + 1)
            } else {
                continue;
            };
            if seen.insert(next) {
                parent.insert(next, (node, e));
                queue.push_back(next);
            }
        }
    }
    unreachable!("members of one subset share every projection reaching it")
}

/// Grows `observable` until the projection is an `Lm(a)`-observer.
///
/// Each failed check adds the hidden events on the two witness prefixes that
/// share a projection but lead to different futures. After `|Σ|` rounds the
/// full alphabet is returned, which is always an observer.
pub fn extend_to_observer(a: &Automaton, observable: &Alphabet) -> Result<Alphabet> {
    check_observable(a, observable)?;
    let mut current = observable.clone();
    for _ in 0..a.alphabet().len() {
        let verdict = is_natural_observer(a, &current)?;
        let Some(w) = verdict.witness else {
            return Ok(current);
        };
        let hidden: Vec<Event> = w
            .prefix
            .iter()
            .chain(&w.other_prefix)
            .copied()
            .filter(|e| !current.contains(*e))
            .collect();
        if hidden.is_empty() {
            break;
        }
        for e in hidden {
            current.insert(e);
        }
    }
    if is_natural_observer(a, &current)?.holds {
        Ok(current)
    } else {
        Ok(a.alphabet().clone())
    }
}

/// A cluster automaton with the alphabet it is to be projected onto.
#[derive(Debug, Clone)]
pub struct AbstractionSpec {
    pub source: Automaton,
    pub observable: Alphabet,
    pub verified_observer: bool,
}

impl AbstractionSpec {
    pub fn new(source: Automaton, observable: Alphabet) -> Result<Self> {
        let verified_observer = is_natural_observer(&source, &observable)?.holds;
        Ok(Self {
            source,
            observable,
            verified_observer,
        })
    }

    pub fn release(&self) -> Result<Automaton> {
        if !self.verified_observer {
            return Err(Error::Precondition(format!(
                "projection of {} is not a verified natural observer",
                self.source.name()
            )));
        }
        if !is_nonblocking(&self.source) {
            return Err(Error::Precondition(format!(
                "cluster {} is blocking",
                self.source.name()
            )));
        }
        let abs = natural_projection(&self.source, &self.observable)?;
        Ok(trim(&abs))
    }
}

/// `Lm(ABS) = P(Lm(cluster))` under a verified natural observer.
pub fn abstract_cluster(cluster: &Automaton, observable: &Alphabet) -> Result<Automaton> {
    AbstractionSpec::new(cluster.clone(), observable.clone())?.release()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{language, EventRegistry};
    use crate::fixtures::{self, build};

    /// Two branches from the initial state: `x a m` reaches a marked state,
    /// `y a b` does too, but after hiding x and y the continuations differ.
    fn branching() -> (EventRegistry, Automaton) {
        let mut reg = EventRegistry::new();
        for e in ["x", "y", "a", "m", "b"] {
            reg.controllable(e);
        }
        let a = build(
            &reg,
            "BR",
            &["x", "y", "a", "m", "b"],
            6,
            &[3, 5],
            &[
                (0, "x", 1),
                (1, "a", 2),
                (2, "m", 3),
                (0, "y", 4),
                (4, "a", 5),
                (5, "b", 3),
            ],
        );
        (reg, a)
    }

    #[test]
    fn interface_is_an_intersection() {
        let mut reg = EventRegistry::new();
        let [a, b, x, y, z] = ["a", "b", "x", "y", "z"].map(|n| reg.controllable(n));
        let cluster: Alphabet = [a, b, x].iter().collect();
        let ext: Alphabet = [x, y].iter().collect();
        assert_eq!(interface_alphabet(&cluster, [&ext]), [x].iter().collect());
        let far: Alphabet = [y].iter().collect();
        assert!(interface_alphabet(&cluster, [&far]).is_empty());
        let c1: Alphabet = [a, z].iter().collect();
        let c2: Alphabet = [b, z].iter().collect();
        assert_eq!(interface_alphabet(&c1, [&c2]), [z].iter().collect());
        assert_eq!(interface_alphabet(&c2, [&c1]), [z].iter().collect());
    }

    #[test]
    fn full_alphabet_is_an_observer() {
        let (_, a) = branching();
        assert!(is_natural_observer(&a, a.alphabet()).unwrap().holds);
    }

    #[test]
    fn merged_branches_violate_and_witness_is_genuine() {
        let (reg, a) = branching();
        let obs: Alphabet = ["a", "m", "b"].iter().map(|n| reg.lookup(n).unwrap()).collect();
        let v = is_natural_observer(&a, &obs).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        let proj = |s: &[Event]| -> Vec<Event> { s.iter().copied().filter(|e| obs.contains(*e)).collect() };
        assert_eq!(proj(&w.prefix), proj(&w.other_prefix));
        assert!(w.continuation.iter().all(|e| obs.contains(*e)));
        // The other prefix realizes the continuation, the witness prefix cannot.
        let p = natural_projection(&a, &obs).unwrap();
        let mut full = proj(&w.prefix);
        full.extend(&w.continuation);
        assert!(p.accepts(&full));
        assert_eq!(a.run(&w.prefix), Some(w.state));
    }

    #[test]
    fn single_path_chain_is_an_observer() {
        let mut reg = EventRegistry::new();
        for e in ["x", "y", "z"] {
            reg.controllable(e);
        }
        let a = build(
            &reg,
            "C",
            &["x", "y", "z"],
            4,
            &[3],
            &[(0, "x", 1), (1, "y", 2), (2, "z", 3)],
        );
        let z: Alphabet = [reg.lookup("z").unwrap()].iter().collect();
        assert!(is_natural_observer(&a, &z).unwrap().holds);
        assert!(is_natural_observer(&a, &Alphabet::new()).unwrap().holds);
        assert_eq!(extend_to_observer(&a, &Alphabet::new()).unwrap(), Alphabet::new());
    }

    #[test]
    fn extension_repairs_the_branching_case() {
        let (reg, a) = branching();
        let obs: Alphabet = ["a", "m", "b"].iter().map(|n| reg.lookup(n).unwrap()).collect();
        let ext = extend_to_observer(&a, &obs).unwrap();
        assert!(obs.is_subset(&ext));
        assert!(is_natural_observer(&a, &ext).unwrap().holds);
        assert_eq!(extend_to_observer(&a, &ext).unwrap(), ext);
    }

    #[test]
    fn extension_of_an_observer_is_unchanged() {
        let (_, a) = branching();
        assert_eq!(&extend_to_observer(&a, a.alphabet()).unwrap(), a.alphabet());
    }

    #[test]
    fn abstraction_corner_cases() {
        let (_, a) = branching();
        let full = abstract_cluster(&a, a.alphabet()).unwrap();
        assert!(language::equivalent(&full, &a));
        let nothing = abstract_cluster(&a, &Alphabet::new()).unwrap();
        assert_eq!(nothing.num_states(), 1);
        assert!(nothing.accepts(&[]));
    }

    #[test]
    fn non_observer_abstraction_is_refused() {
        let (reg, a) = branching();
        let obs: Alphabet = ["a", "m", "b"].iter().map(|n| reg.lookup(n).unwrap()).collect();
        assert!(matches!(abstract_cluster(&a, &obs), Err(Error::Precondition(_))));
    }

    #[test]
    fn small_factory_supervisor_needs_the_start_event() {
        let p = fixtures::small_factory();
        let d = crate::synthesis::synth_decentralized(&p.components, &p.specs).unwrap();
        let sup = &d.supervisors[0].automaton;
        // After a hidden a1 the marked idle state needs b1 first.
        let obs: Alphabet = p.events(&["b1", "a2"]).iter().collect();
        assert!(!is_natural_observer(sup, &obs).unwrap().holds);
        let ext = extend_to_observer(sup, &obs).unwrap();
        assert!(ext.contains(p.event("a1")));
        let abs = abstract_cluster(sup, &ext).unwrap();
        let expected = natural_projection(sup, &ext).unwrap();
        assert!(language::marked_equal(&abs, &expected));
        assert!(is_nonblocking(&abs));
    }
}
