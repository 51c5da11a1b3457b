//! Exact language comparisons by synchronized pair walks.

use std::collections::{HashSet, VecDeque};

use crate::automata::{trim, Automaton, Event, StateId};

type Pair = (Option<StateId>, Option<StateId>);

/// Breadth-first walk over `(state of a, state of b)` pairs; `None` is the
/// implicit dead state. Returns the shortest string at which `violated` holds.
fn walk(a: &Automaton, b: &Automaton, violated: impl Fn(Pair) -> bool) -> Option<Vec<Event>> {
    let start = (a.initial(), b.initial());
    if start == (None, None) {
        return None;
    }
    let mut parent: Vec<Option<(usize, Event)>> = vec![None];
    let mut nodes: Vec<Pair> = vec![start];
    let mut seen: HashSet<Pair> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);

    while let Some(i) = queue.pop_front() {
        let pair = nodes[i];
        if violated(pair) {
            let mut trace = Vec::new();
            let mut j = i;
            while let Some((up, e)) = parent[j] {
                trace.push(e);
                j = up;
            }
            trace.reverse();
            return Some(trace);
        }
        let mut events: Vec<Event> = Vec::new();
        if let Some(qa) = pair.0 {
            events.extend(a.transitions_from(qa).iter().map(|&(e, _)| e));
        }
        if let Some(qb) = pair.1 {
            events.extend(b.transitions_from(qb).iter().map(|&(e, _)| e));
        }
        events.sort_unstable();
        events.dedup();
        for e in events {
            let next = (pair.0.and_then(|q| a.step(q, e)), pair.1.and_then(|q| b.step(q, e)));
            if seen.insert(next) {
                nodes.push(next);
                parent.push(Some((i, e)));
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    None
}

/// Shortest string in exactly one of `L(a)`, `L(b)`.
pub fn closed_difference(a: &Automaton, b: &Automaton) -> Option<Vec<Event>> {
    walk(a, b, |(x, y)| x.is_some() != y.is_some())
}

/// Shortest string in exactly one of `Lm(a)`, `Lm(b)`.
pub fn marked_difference(a: &Automaton, b: &Automaton) -> Option<Vec<Event>> {
    let (ta, tb) = (trim(a), trim(b));
    walk(&ta, &tb, |(x, y)| {
        x.is_some() != y.is_some() || x.is_some_and(|q| ta.is_marked(q)) != y.is_some_and(|q| tb.is_marked(q))
    })
}

pub fn closed_equal(a: &Automaton, b: &Automaton) -> bool {
    closed_difference(a, b).is_none()
}

pub fn marked_equal(a: &Automaton, b: &Automaton) -> bool {
    marked_difference(a, b).is_none()
}

/// Both the closed and the marked languages coincide.
pub fn equivalent(a: &Automaton, b: &Automaton) -> bool {
    closed_equal(a, b) && marked_equal(a, b)
}

/// `Lm(a) ⊆ Lm(b)`.
pub fn marked_subset(a: &Automaton, b: &Automaton) -> bool {
    let ta = trim(a);
    walk(&ta, b, |(x, y)| {
        x.is_some_and(|q| ta.is_marked(q)) && !y.is_some_and(|q| b.is_marked(q))
    })
    .is_none()
}
