use crate::automata::{Alphabet, Event};
use crate::error::Error;

pub type StateId = usize;

/// A deterministic generator `(Q, Σ, δ, q0, Qm)`.
///
/// States are dense indices `0..n`. An automaton with no states is the empty
/// automaton; both of its languages are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    name: String,
    alphabet: Alphabet,
    initial: Option<StateId>,
    marked: Vec<bool>,
    // Outgoing transitions per state, sorted by event.
    delta: Vec<Vec<(Event, StateId)>>,
}

impl Automaton {
    pub fn empty(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Self {
            name: name.into(),
            alphabet,
            initial: None,
            marked: Vec::new(),
            delta: Vec::new(),
        }
    }

    /// One marked state with a selfloop on every event: the language `Σ*`.
    pub fn universal(name: impl Into<String>, alphabet: Alphabet) -> Self {
        let delta = vec![alphabet.iter().map(|e| (e, 0)).collect()];
        Self {
            name: name.into(),
            alphabet,
            initial: Some(0),
            marked: vec![true],
            delta,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.marked.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_none()
    }

    pub fn is_marked(&self, q: StateId) -> bool {
        self.marked[q]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.marked.iter().enumerate().filter_map(|(q, &m)| m.then_some(q))
    }

    pub fn transitions_from(&self, q: StateId) -> &[(Event, StateId)] {
        &self.delta[q]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Event, StateId)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(q, out)| out.iter().map(move |&(e, r)| (q, e, r)))
    }

    pub fn step(&self, q: StateId, event: Event) -> Option<StateId> {
        let out = &self.delta[q];
        out.binary_search_by(|(e, _)| e.cmp(&event)).ok().map(|i| out[i].1)
    }

    /// State reached by `trace` from the initial state, if defined.
    pub fn run(&self, trace: &[Event]) -> Option<StateId> {
        let mut q = self.initial?;
        for &e in trace {
            q = self.step(q, e)?;
        }
        Some(q)
    }

    /// `trace ∈ L(self)`.
    pub fn generates(&self, trace: &[Event]) -> bool {
        self.run(trace).is_some()
    }

    /// `trace ∈ Lm(self)`.
    pub fn accepts(&self, trace: &[Event]) -> bool {
        self.run(trace).is_some_and(|q| self.marked[q])
    }

    /// Widens the alphabet without adding transitions.
    pub fn extend_alphabet(mut self, extra: &Alphabet) -> Self {
        self.alphabet = self.alphabet.union(extra);
        self
    }

    pub(crate) fn from_parts(
        name: String,
        alphabet: Alphabet,
        initial: Option<StateId>,
        marked: Vec<bool>,
        mut delta: Vec<Vec<(Event, StateId)>>,
    ) -> Self {
        for out in &mut delta {
            out.sort_unstable_by_key(|&(e, _)| e);
        }
        debug_assert_eq!(marked.len(), delta.len());
        debug_assert!(initial.is_some() || marked.is_empty());
        Self {
            name,
            alphabet,
            initial,
            marked,
            delta,
        }
    }
}

/// Incremental constructor that enforces determinism and alphabet closure.
#[derive(Debug, Clone)]
pub struct AutomatonBuilder {
    name: String,
    alphabet: Alphabet,
    initial: Option<StateId>,
    marked: Vec<bool>,
    delta: Vec<Vec<(Event, StateId)>>,
}

impl AutomatonBuilder {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Self {
            name: name.into(),
            alphabet,
            initial: None,
            marked: Vec::new(),
            delta: Vec::new(),
        }
    }

    pub fn add_state(&mut self, marked: bool) -> StateId {
        self.marked.push(marked);
        self.delta.push(Vec::new());
        self.marked.len() - 1
    }

    pub fn add_states(&mut self, n: usize) -> StateId {
        let first = self.marked.len();
        for _ in 0..n {
            self.add_state(false);
        }
        first
    }

    pub fn set_marked(&mut self, q: StateId, marked: bool) -> &mut Self {
        self.marked[q] = marked;
        self
    }

    pub fn set_initial(&mut self, q: StateId) -> &mut Self {
        self.initial = Some(q);
        self
    }

    pub fn num_states(&self) -> usize {
        self.marked.len()
    }

    pub fn add_transition(&mut self, src: StateId, event: Event, dst: StateId) -> Result<(), Error> {
        let n = self.marked.len();
        if src >= n || dst >= n {
            return Err(Error::Validation(format!(
                "automaton {}: transition ({src}, {event}, {dst}) references an undeclared state",
                self.name
            )));
        }
        if !self.alphabet.contains(event) {
            return Err(Error::Validation(format!(
                "automaton {}: transition event {event} is outside the alphabet",
                self.name
            )));
        }
        if let Some(&(_, existing)) = self.delta[src].iter().find(|(e, _)| *e == event) {
            if existing == dst {
                return Ok(());
            }
            return Err(Error::Nondeterministic {
                automaton: self.name.clone(),
                state: src.to_string(),
                event: event.to_string(),
            });
        }
        self.delta[src].push((event, dst));
        Ok(())
    }

    pub fn build(self) -> Result<Automaton, Error> {
        match self.initial {
            None if self.marked.is_empty() => Ok(Automaton::empty(self.name, self.alphabet)),
            None => Err(Error::Validation(format!(
                "automaton {} has states but no initial state",
                self.name
            ))),
            Some(q0) if q0 >= self.marked.len() => Err(Error::Validation(format!(
                "automaton {}: initial state {q0} is undeclared",
                self.name
            ))),
            Some(q0) => Ok(Automaton::from_parts(
                self.name,
                self.alphabet,
                Some(q0),
                self.marked,
                self.delta,
            )),
        }
    }
}
