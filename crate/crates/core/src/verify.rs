//! Brute-force oracles. Nothing here calls into the synthesis, abstraction or
//! clustering code; products and fixpoints are rebuilt naively.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::automata::{trim, Alphabet, Automaton, AutomatonBuilder, Event, StateId};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationOutcome {
    pub holds: bool,
    /// Present iff `holds` is false.
    pub witness: Option<Vec<Event>>,
    pub explored_states: usize,
}

impl VerificationOutcome {
    fn holds(explored_states: usize) -> Self {
        Self {
            holds: true,
            witness: None,
            explored_states,
        }
    }

    fn fails(witness: Vec<Event>, explored_states: usize) -> Self {
        Self {
            holds: false,
            witness: Some(witness),
            explored_states,
        }
    }
}

/// Reachable part of the synchronous product of `parts`, built tuple by tuple.
struct Explored {
    tuples: Vec<Vec<StateId>>,
    edges: Vec<Vec<(Event, usize)>>,
    parent: Vec<Option<(usize, Event)>>,
}

impl Explored {
    fn build(parts: &[&Automaton], budget: usize, what: &str) -> Result<Self> {
        let mut out = Explored {
            tuples: Vec::new(),
            edges: Vec::new(),
            parent: Vec::new(),
        };
        let Some(start) = parts.iter().map(|a| a.initial()).collect::<Option<Vec<_>>>() else {
            return Ok(out);
        };
        let events: Vec<Event> = parts
            .iter()
            .fold(Alphabet::new(), |acc, a| acc.union(a.alphabet()))
            .iter()
            .collect();
        let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
        index.insert(start.clone(), 0);
        out.tuples.push(start);
        out.edges.push(Vec::new());
        out.parent.push(None);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            'event: for &e in &events {
                let mut next = out.tuples[i].clone();
                for (k, a) in parts.iter().enumerate() {
                    if a.alphabet().contains(e) {
                        match a.step(next[k], e) {
                            Some(r) => next[k] = r,
                            None => continue 'event,
                        }
                    }
                }
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if out.tuples.len() >= budget {
                            return Err(Error::BudgetExceeded {
                                budget,
                                what: what.to_string(),
                            });
                        }
                        let j = out.tuples.len();
                        index.insert(next.clone(), j);
                        out.tuples.push(next);
                        out.edges.push(Vec::new());
                        out.parent.push(Some((i, e)));
                        queue.push_back(j);
                        j
                    }
                };
                out.edges[i].push((e, j));
            }
        }
        Ok(out)
    }

    fn trace_to(&self, mut j: usize) -> Vec<Event> {
        let mut trace = Vec::new();
        while let Some((up, e)) = self.parent[j] {
            trace.push(e);
            j = up;
        }
        trace.reverse();
        trace
    }
}

/// Repeats a forward sweep until no new state is found to reach an accepted
/// state through `alive` states.
fn naive_coreach(edges: &[Vec<(Event, usize)>], accepted: &[bool], alive: &[bool]) -> Vec<bool> {
    let mut co: Vec<bool> = (0..edges.len()).map(|q| alive[q] && accepted[q]).collect();
    loop {
        let mut changed = false;
        for q in 0..edges.len() {
            if alive[q] && !co[q] && edges[q].iter().any(|&(_, r)| co[r]) {
                co[q] = true;
                changed = true;
            }
        }
        if !changed {
            return co;
        }
    }
}

/// Nonblocking check of `sups ∥ coords`: every reachable product state must
/// reach a state marked in every operand.
pub fn monolithic_nonblocking(
    sups: &[&Automaton],
    coords: &[&Automaton],
    budget: usize,
) -> Result<VerificationOutcome> {
    let parts: Vec<&Automaton> = sups.iter().chain(coords).copied().collect();
    if parts.is_empty() {
        return Ok(VerificationOutcome::holds(0));
    }
    let x = Explored::build(&parts, budget, "the monolithic product")?;
    let n = x.tuples.len();
    let marked: Vec<bool> = x
        .tuples
        .iter()
        .map(|t| parts.iter().zip(t).all(|(a, &q)| a.is_marked(q)))
        .collect();
    let co = naive_coreach(&x.edges, &marked, &vec![true; n]);
    // Tuples are numbered in breadth-first order, so the first failure has a
    // shortest trace.
    match (0..n).find(|&q| !co[q]) {
        Some(q) => Ok(VerificationOutcome::fails(x.trace_to(q), n)),
        None => Ok(VerificationOutcome::holds(n)),
    }
}

/// Supremal controllable sublanguage of `Lm(plant) ∥ Lm(spec)` with respect
/// to `plant`, by bad-state removal on the full product until stable.
pub fn brute_force_supc(plant: &Automaton, spec: &Automaton, budget: usize) -> Result<Automaton> {
    let parts = [plant, spec];
    let x = Explored::build(&parts, budget, "the supervisor product")?;
    let alphabet = plant.alphabet().union(spec.alphabet());
    let name = format!("bf_supC({}, {})", plant.name(), spec.name());
    let n = x.tuples.len();
    let marked: Vec<bool> = x
        .tuples
        .iter()
        .map(|t| plant.is_marked(t[0]) && spec.is_marked(t[1]))
        .collect();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for q in 0..n {
            if !alive[q] {
                continue;
            }
            let p = x.tuples[q][0];
            let escapes = plant
                .transitions_from(p)
                .iter()
                .filter(|(e, _)| e.is_uncontrollable())
                .any(|&(e, _)| !x.edges[q].iter().any(|&(f, r)| f == e && alive[r]));
            if escapes {
                alive[q] = false;
                changed = true;
            }
        }
        let co = naive_coreach(&x.edges, &marked, &alive);
        for q in 0..n {
            if alive[q] && !co[q] {
                alive[q] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if n == 0 || !alive[0] {
        return Ok(Automaton::empty(name, alphabet));
    }
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut stack = vec![0usize];
    while let Some(q) = stack.pop() {
        for &(_, r) in &x.edges[q] {
            if alive[r] && !reach[r] {
                reach[r] = true;
                stack.push(r);
            }
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut b = AutomatonBuilder::new(name, alphabet);
    for q in (0..n).filter(|&q| reach[q]) {
        id[q] = b.add_state(marked[q]);
    }
    b.set_initial(0);
    for q in (0..n).filter(|&q| reach[q]) {
        for &(e, r) in &x.edges[q] {
            if reach[r] {
                b.add_transition(id[q], e, id[r])?;
            }
        }
    }
    b.build()
}

/// `closure(Lm(k))·Σu ∩ L(plant) ⊆ closure(Lm(k))`. Events outside the plant
/// alphabet leave the plant where it is; uncontrollable plant events outside
/// the alphabet of `k` are unconstrained by `k` and never violate.
pub fn controllable(k: &Automaton, plant: &Automaton) -> VerificationOutcome {
    let tk = trim(k);
    let (Some(k0), Some(p0)) = (tk.initial(), plant.initial()) else {
        return VerificationOutcome::holds(0);
    };
    type Node = (StateId, Option<StateId>);
    let mut nodes: Vec<Node> = vec![(k0, Some(p0))];
    let mut parent: Vec<Option<(usize, Event)>> = vec![None];
    let mut seen: HashSet<Node> = HashSet::from([(k0, Some(p0))]);
    let mut queue = VecDeque::from([0usize]);
    let trace = |parent: &[Option<(usize, Event)>], mut j: usize| {
        let mut t = Vec::new();
        while let Some((up, e)) = parent[j] {
            t.push(e);
            j = up;
        }
        t.reverse();
        t
    };
    while let Some(i) = queue.pop_front() {
        let (q, p) = nodes[i];
        if let Some(p) = p {
            for &(e, _) in plant.transitions_from(p) {
                if e.is_uncontrollable() && tk.alphabet().contains(e) && tk.step(q, e).is_none() {
                    let mut w = trace(&parent, i);
                    w.push(e);
                    return VerificationOutcome::fails(w, nodes.len());
                }
            }
        }
        for &(e, r) in tk.transitions_from(q) {
            let np = if plant.alphabet().contains(e) {
                p.and_then(|p| plant.step(p, e))
            } else {
                p
            };
            let next = (r, np);
            if seen.insert(next) {
                nodes.push(next);
                parent.push(Some((i, e)));
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    VerificationOutcome::holds(nodes.len())
}

/// Literal bounded observer check. For every reachable `(state, P(s))` with
/// `|P(s)| ≤ depth` and every projected marked string `w` of length at most
/// `depth` extending `P(s)`, searches for an actual continuation from the
/// state realizing the rest of `w` and ending marked. Exponential in `depth`.
pub fn enumerate_observer(a: &Automaton, observable: &Alphabet, depth: usize) -> bool {
    let t = trim(a);
    let Some(q0) = t.initial() else {
        return true;
    };
    let mut pairs: HashSet<(StateId, Vec<Event>)> = HashSet::new();
    let mut queue = VecDeque::from([(q0, Vec::new())]);
    pairs.insert((q0, Vec::new()));
    while let Some((q, ps)) = queue.pop_front() {
        for &(e, r) in t.transitions_from(q) {
            let next = if observable.contains(e) {
                if ps.len() == depth {
                    continue;
                }
                let mut n = ps.clone();
                n.push(e);
                n
            } else {
                ps.clone()
            };
            if pairs.insert((r, next.clone())) {
                queue.push_back((r, next));
            }
        }
    }
    let words: BTreeSet<&Vec<Event>> = pairs.iter().filter(|(q, _)| t.is_marked(*q)).map(|(_, w)| w).collect();
    pairs.iter().all(|(q, ps)| {
        words
            .iter()
            .filter(|w| w.starts_with(ps))
            .all(|w| realizes(&t, observable, *q, &w[ps.len()..]))
    })
}

/// Bounded observer check with the same verdict as [`enumerate_observer`],
/// but strings with equal projection and equal set of reached states are
/// handled once.
///
/// For a projected prefix `w` let `S(w)` be the states reached by strings
/// projecting to `w`. The condition at `(q, w)` with `q ∈ S(w)` fails within
/// the bound iff some projected `t` with `|w| + |t| ≤ depth` leads `S(w)` into
/// a marked state while `q` cannot realize it. Only the shortest `w` reaching
/// each `S` matters, and for each `(S, q)` only the shortest such `t`.
pub fn brute_force_observer(a: &Automaton, observable: &Alphabet, depth: usize) -> bool {
    let t = trim(a);
    let Some(q0) = t.initial() else {
        return true;
    };
    let obs: Vec<Event> = observable.iter().collect();
    let close = |set: &[StateId]| -> Vec<StateId> {
        let mut out: BTreeSet<StateId> = set.iter().copied().collect();
        let mut stack: Vec<StateId> = set.to_vec();
        while let Some(q) = stack.pop() {
            for &(e, r) in t.transitions_from(q) {
                if !observable.contains(e) && out.insert(r) {
                    stack.push(r);
                }
            }
        }
        out.into_iter().collect()
    };
    let after = |set: &[StateId], e: Event| -> Vec<StateId> {
        let next: Vec<StateId> = set.iter().filter_map(|&q| t.step(q, e)).collect();
        close(&next)
    };
    let marked = |set: &[StateId]| set.iter().any(|&q| t.is_marked(q));

    // Shortest projected prefix length for every reachable state set.
    let root = close(&[q0]);
    let mut first: HashMap<Vec<StateId>, usize> = HashMap::from([(root.clone(), 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(set) = queue.pop_front() {
        let len = first[&set];
        if len == depth {
            continue;
        }
        for &e in &obs {
            let next = after(&set, e);
            if !next.is_empty() && !first.contains_key(&next) {
                first.insert(next.clone(), len + 1);
                queue.push_back(next);
            }
        }
    }

    first.iter().all(|(set, &len)| {
        let budget = depth - len;
        set.iter().all(|&q| {
            // Walk (from S, from q) pairs for at most `budget` projected steps.
            let start = (set.clone(), close(&[q]));
            let mut seen = HashSet::from([start.clone()]);
            let mut frontier = vec![start];
            for step in 0..=budget {
                let mut next_frontier = Vec::new();
                for (s, r) in frontier {
                    if marked(&s) && !marked(&r) {
                        return false;
                    }
                    if step == budget {
                        continue;
                    }
                    for &e in &obs {
                        let pair = (after(&s, e), after(&r, e));
                        if !pair.0.is_empty() && seen.insert(pair.clone()) {
                            next_frontier.push(pair);
                        }
                    }
                }
                frontier = next_frontier;
            }
            true
        })
    })
}

/// Whether some string `u` with `P(u) = rest` leads from `q` to a marked state.
fn realizes(t: &Automaton, observable: &Alphabet, q: StateId, rest: &[Event]) -> bool {
    let mut seen = HashSet::from([(q, 0usize)]);
    let mut stack = vec![(q, 0usize)];
    while let Some((s, i)) = stack.pop() {
        if i == rest.len() && t.is_marked(s) {
            return true;
        }
        for &(e, r) in t.transitions_from(s) {
            let next = if !observable.contains(e) {
                (r, i)
            } else if i < rest.len() && rest[i] == e {
                (r, i + 1)
            } else {
                continue;
            };
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    false
}

/// All marked strings of length at most `depth`.
pub fn marked_strings(a: &Automaton, depth: usize) -> BTreeSet<Vec<Event>> {
    let mut out = BTreeSet::new();
    let Some(q0) = a.initial() else {
        return out;
    };
    let mut frontier = vec![(q0, Vec::new())];
    for len in 0..=depth {
        let mut next = Vec::new();
        for (q, s) in frontier {
            if a.is_marked(q) {
                out.insert(s.clone());
            }
            if len < depth {
                for &(e, r) in a.transitions_from(q) {
                    let mut n = s.clone();
                    n.push(e);
                    next.push((r, n));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Marked languages agree on all strings up to `depth`.
pub fn bounded_marked_equal(a: &Automaton, b: &Automaton, depth: usize) -> bool {
    marked_strings(a, depth) == marked_strings(b, depth)
}
