use std::collections::{HashMap, VecDeque};

use crate::automata::{Alphabet, Automaton, Event, StateId};
use crate::error::Error;

/// Natural projection of `a` onto `observable`.
///
/// Unobservable events are erased and the result determinized by subset
/// construction. Subsets are explored breadth-first with events in ascending
/// order, so the output numbering is reproducible.
pub fn natural_projection(a: &Automaton, observable: &Alphabet) -> Result<Automaton, Error> {
    check_observable(a, observable)?;
    let name = format!("P({})", a.name());
    let Some(q0) = a.initial() else {
        return Ok(Automaton::empty(name, observable.clone()));
    };
    let mut dfa = SubsetDfa::new(a, observable);
    dfa.explore(&[q0]);
    Ok(dfa.into_automaton(name))
}

pub(crate) fn check_observable(a: &Automaton, observable: &Alphabet) -> Result<(), Error> {
    if observable.is_subset(a.alphabet()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "observable alphabet is not a subset of the alphabet of {}",
            a.name()
        )))
    }
}

/// Subset construction over the observable events of `source`, shared across
/// several start sets.
pub(crate) struct SubsetDfa<'a> {
    source: &'a Automaton,
    observable: &'a Alphabet,
    pub subsets: Vec<Vec<StateId>>,
    pub marked: Vec<bool>,
    pub delta: Vec<Vec<(Event, usize)>>,
    index: HashMap<Vec<StateId>, usize>,
}

impl<'a> SubsetDfa<'a> {
    pub fn new(source: &'a Automaton, observable: &'a Alphabet) -> Self {
        Self {
            source,
            observable,
            subsets: Vec::new(),
            marked: Vec::new(),
            delta: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Closure of `states` under unobservable transitions, sorted.
    pub fn closure(&self, states: &[StateId]) -> Vec<StateId> {
        let n = self.source.num_states();
        let mut seen = vec![false; n];
        let mut stack: Vec<StateId> = Vec::with_capacity(states.len());
        for &q in states {
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            for &(e, r) in self.source.transitions_from(q) {
                if !self.observable.contains(e) && !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..n).filter(|&q| seen[q]).collect()
    }

    /// Adds the closure of `start` and everything reachable from it; returns
    /// the subset index of the start.
    pub fn explore(&mut self, start: &[StateId]) -> usize {
        let start = self.closure(start);
        let (root, fresh) = self.intern(start);
        if !fresh {
            return root;
        }
        let mut queue = VecDeque::from([root]);
        while let Some(d) = queue.pop_front() {
            let mut by_event: Vec<(Event, Vec<StateId>)> = Vec::new();
            for &q in &self.subsets[d] {
                for &(e, r) in self.source.transitions_from(q) {
                    if !self.observable.contains(e) {
                        continue;
                    }
                    match by_event.iter_mut().find(|(f, _)| *f == e) {
                        Some((_, targets)) => targets.push(r),
                        None => by_event.push((e, vec![r])),
                    }
                }
            }
            by_event.sort_unstable_by_key(|(e, _)| *e);
            let mut out = Vec::with_capacity(by_event.len());
            for (e, targets) in by_event {
                let next = self.closure(&targets);
                let (id, fresh) = self.intern(next);
                if fresh {
                    queue.push_back(id);
                }
                out.push((e, id));
            }
            self.delta[d] = out;
        }
        root
    }

    fn intern(&mut self, subset: Vec<StateId>) -> (usize, bool) {
        if let Some(&id) = self.index.get(&subset) {
            return (id, false);
        }
        let id = self.subsets.len();
        self.marked.push(subset.iter().any(|&q| self.source.is_marked(q)));
        self.index.insert(subset.clone(), id);
        self.subsets.push(subset);
        self.delta.push(Vec::new());
        (id, true)
    }

    pub fn step(&self, d: usize, e: Event) -> Option<usize> {
        self.delta[d]
            .binary_search_by(|(f, _)| f.cmp(&e))
            .ok()
            .map(|i| self.delta[d][i].1)
    }

    pub fn observes(&self, e: Event) -> bool {
        self.observable.contains(e)
    }

    pub fn into_automaton(self, name: String) -> Automaton {
        Automaton::from_parts(name, self.observable.clone(), Some(0), self.marked, self.delta)
    }
}
