use crate::automata::{Automaton, Event, EventRegistry};

/// Plant components and specifications over one frozen event registry.
#[derive(Debug, Clone)]
pub struct Project {
    pub registry: EventRegistry,
    pub components: Vec<Automaton>,
    pub specs: Vec<Automaton>,
}

impl Project {
    /// Looks up an event by name; panics if it is unknown.
    pub fn event(&self, name: &str) -> Event {
        self.registry
            .lookup(name)
            .unwrap_or_else(|| panic!("unknown event {name}"))
    }

    pub fn events(&self, names: &[&str]) -> Vec<Event> {
        names.iter().map(|n| self.event(n)).collect()
    }
}
