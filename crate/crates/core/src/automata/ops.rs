//! Reachability, coreachability, trimming and the nonblocking test.

use std::collections::VecDeque;

use crate::automata::{Automaton, StateId};

/// Forward closure from the initial state.
pub fn reachable(a: &Automaton) -> Vec<bool> {
    let mut seen = vec![false; a.num_states()];
    let Some(q0) = a.initial() else {
        return seen;
    };
    let mut queue = VecDeque::from([q0]);
    seen[q0] = true;
    while let Some(q) = queue.pop_front() {
        for &(_, r) in a.transitions_from(q) {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    seen
}

/// Backward closure from the marked states.
pub fn coreachable(a: &Automaton) -> Vec<bool> {
    coreachable_within(a, &vec![true; a.num_states()])
}

/// Backward closure from marked states, moving only through `allowed` states.
pub(crate) fn coreachable_within(a: &Automaton, allowed: &[bool]) -> Vec<bool> {
    let n = a.num_states();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (q, _, r) in a.transitions() {
        if allowed[q] && allowed[r] {
            preds[r].push(q);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for q in a.marked_states() {
        if allowed[q] {
            seen[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Keeps the states in `keep` that remain reachable through kept states.
/// Surviving states keep their relative order.
pub fn restrict(a: &Automaton, keep: &[bool]) -> Automaton {
    let Some(q0) = a.initial().filter(|&q| keep[q]) else {
        return Automaton::empty(a.name(), a.alphabet().clone());
    };
    let n = a.num_states();
    let mut live = vec![false; n];
    live[q0] = true;
    let mut queue = VecDeque::from([q0]);
    while let Some(q) = queue.pop_front() {
        for &(_, r) in a.transitions_from(q) {
            if keep[r] && !live[r] {
                live[r] = true;
                queue.push_back(r);
            }
        }
    }
    let mut renumber = vec![usize::MAX; n];
    let mut next = 0;
    for q in 0..n {
        if live[q] {
            renumber[q] = next;
            next += 1;
        }
    }
    let mut marked = Vec::with_capacity(next);
    let mut delta = Vec::with_capacity(next);
    for q in (0..n).filter(|&q| live[q]) {
        marked.push(a.is_marked(q));
        delta.push(
            a.transitions_from(q)
                .iter()
                .filter(|&&(_, r)| live[r])
                .map(|&(e, r)| (e, renumber[r]))
                .collect(),
        );
    }
    Automaton::from_parts(
        a.name().to_string(),
        a.alphabet().clone(),
        Some(renumber[q0]),
        marked,
        delta,
    )
}

/// Restriction to states that are both reachable and coreachable.
pub fn trim(a: &Automaton) -> Automaton {
    let reach = reachable(a);
    let coreach = coreachable(a);
    let keep: Vec<bool> = reach.iter().zip(&coreach).map(|(&r, &c)| r && c).collect();
    restrict(a, &keep)
}

/// `L(a)` equals the prefix closure of `Lm(a)`.
pub fn is_nonblocking(a: &Automaton) -> bool {
    let coreach = coreachable(a);
    reachable(a).iter().zip(&coreach).all(|(&r, &c)| !r || c)
}

/// Whether every state is reachable and coreachable.
pub fn is_trim(a: &Automaton) -> bool {
    reachable(a).iter().all(|&r| r) && is_nonblocking(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Alphabet, AutomatonBuilder, EventRegistry};

    fn chain(marks: &[bool]) -> (Automaton, EventRegistry) {
        let mut reg = EventRegistry::new();
        let events: Vec<_> = (0..marks.len().saturating_sub(1))
            .map(|i| reg.controllable(&format!("e{i}")))
            .collect();
        let mut b = AutomatonBuilder::new("chain", events.iter().collect::<Alphabet>());
        for &m in marks {
            b.add_state(m);
        }
        b.set_initial(0);
        for (i, &e) in events.iter().enumerate() {
            b.add_transition(i, e, i + 1).unwrap();
        }
        (b.build().unwrap(), reg)
    }

    #[test]
    fn trim_removes_non_coreachable_tail() {
        let (a, _) = chain(&[false, true, false]);
        let t = trim(&a);
        assert_eq!(t.num_states(), 2);
        assert!(is_nonblocking(&t));
        assert!(!is_nonblocking(&a));
    }

    #[test]
    fn trim_of_trim_is_identity() {
        let (a, _) = chain(&[true, false, true]);
        assert_eq!(trim(&a), a);
        assert_eq!(trim(&trim(&a)), trim(&a));
    }

    #[test]
    fn unreachable_marked_island_is_removed() {
        let mut reg = EventRegistry::new();
        let x = reg.controllable("x");
        let mut b = AutomatonBuilder::new("island", [x].iter().collect());
        let q0 = b.add_state(true);
        let i0 = b.add_state(true);
        let i1 = b.add_state(false);
        b.set_initial(q0);
        b.add_transition(i0, x, i1).unwrap();
        b.add_transition(i1, x, i0).unwrap();
        let a = b.build().unwrap();
        assert_eq!(trim(&a).num_states(), 1);
    }

    #[test]
    fn blocking_chain_detected() {
        // q0 marked -> q1 unmarked dead end
        let (a, _) = chain(&[true, false]);
        assert!(!is_nonblocking(&a));
    }

    #[test]
    fn no_marked_state_trims_to_empty() {
        let (a, _) = chain(&[false, false]);
        let t = trim(&a);
        assert!(t.is_empty());
        assert!(is_nonblocking(&t));
    }
}
