use std::collections::{HashMap, VecDeque};

use crate::automata::{Automaton, Event, StateId};

/// Synchronous product `a ∥ b` restricted to reachable state pairs.
///
/// Shared events move both operands, private events move one. A pair is
/// marked iff both components are marked. The result is not trimmed.
pub fn sync_product(a: &Automaton, b: &Automaton) -> Automaton {
    sync_product_with_origins(a, b).0
}

/// Like [`sync_product`], also returning the component state pair behind
/// every product state.
pub fn sync_product_with_origins(a: &Automaton, b: &Automaton) -> (Automaton, Vec<(StateId, StateId)>) {
    let alphabet = a.alphabet().union(b.alphabet());
    let name = format!("{}||{}", a.name(), b.name());
    let (Some(a0), Some(b0)) = (a.initial(), b.initial()) else {
        return (Automaton::empty(name, alphabet), Vec::new());
    };

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut origins = vec![(a0, b0)];
    let mut queue = VecDeque::from([0]);
    index.insert((a0, b0), 0);
    let mut marked = Vec::new();
    let mut delta: Vec<Vec<(Event, StateId)>> = Vec::new();
    let mut moves: Vec<(Event, (StateId, StateId))> = Vec::new();

    while let Some(p) = queue.pop_front() {
        let (qa, qb) = origins[p];
        moves.clear();
        for &(e, ra) in a.transitions_from(qa) {
            if b.alphabet().contains(e) {
                if let Some(rb) = b.step(qb, e) {
                    moves.push((e, (ra, rb)));
                }
            } else {
                moves.push((e, (ra, qb)));
            }
        }
        for &(e, rb) in b.transitions_from(qb) {
            if !a.alphabet().contains(e) {
                moves.push((e, (qa, rb)));
            }
        }
        moves.sort_unstable_by_key(|&(e, _)| e);

        let mut out = Vec::with_capacity(moves.len());
        for &(e, pair) in &moves {
            let target = *index.entry(pair).or_insert_with(|| {
                origins.push(pair);
                queue.push_back(origins.len() - 1);
                origins.len() - 1
            });
            out.push((e, target));
        }
        debug_assert_eq!(delta.len(), p);
        marked.push(a.is_marked(qa) && b.is_marked(qb));
        delta.push(out);
    }

    (Automaton::from_parts(name, alphabet, Some(0), marked, delta), origins)
}

/// Left fold of [`sync_product`] over a non-empty list.
pub fn sync_all<'a, I>(automata: I) -> Option<Automaton>
where
    I: IntoIterator<Item = &'a Automaton>,
{
    let mut iter = automata.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, a| sync_product(&acc, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{language, AutomatonBuilder, EventRegistry};
    use crate::fixtures;

    #[test]
    fn product_with_itself_is_language_equivalent() {
        let f = fixtures::small_factory();
        let m1 = &f.components[0];
        let p = sync_product(m1, m1);
        assert!(language::equivalent(&p, m1));
    }

    #[test]
    fn machine_times_buffer_has_four_states() {
        let f = fixtures::small_factory();
        let (a1, b1, a2) = (f.event("a1"), f.event("b1"), f.event("a2"));
        let p = sync_product(&f.components[0], &f.specs[0]);
        assert_eq!(p.num_states(), 4);
        assert!(p.accepts(&[a1, b1, a2]));
        assert!(!p.accepts(&[a1, b1]));
        assert!(!p.generates(&[a2]));
    }

    #[test]
    fn disjoint_alphabets_shuffle() {
        // Oracle: every string of length <= 2 over {x, y} is in the product
        // iff its restriction to each operand alphabet is in that operand.
        let mut reg = EventRegistry::new();
        let x = reg.controllable("x");
        let y = reg.controllable("y");
        let one_step = |name: &str, e| {
            let mut b = AutomatonBuilder::new(name, [e].iter().collect());
            b.add_state(false);
            b.add_state(true);
            b.set_initial(0);
            b.add_transition(0, e, 1).unwrap();
            b.build().unwrap()
        };
        let a = one_step("A", x);
        let b = one_step("B", y);
        let p = sync_product(&a, &b);
        assert_eq!(p.num_states(), 4);
        let strings: Vec<Vec<_>> = vec![vec![], vec![x], vec![y], vec![x, x], vec![x, y], vec![y, x], vec![y, y]];
        for s in &strings {
            let sa: Vec<_> = s.iter().copied().filter(|&e| e == x).collect();
            let sb: Vec<_> = s.iter().copied().filter(|&e| e == y).collect();
            assert_eq!(p.generates(s), a.generates(&sa) && b.generates(&sb), "{s:?}");
            assert_eq!(p.accepts(s), a.accepts(&sa) && b.accepts(&sb), "{s:?}");
        }
        assert!(p.accepts(&[x, y]) && p.accepts(&[y, x]));
    }

    #[test]
    fn empty_operand_yields_empty_product() {
        let f = fixtures::small_factory();
        let e = Automaton::empty("E", f.specs[0].alphabet().clone());
        assert!(sync_product(&f.components[0], &e).is_empty());
    }
}
