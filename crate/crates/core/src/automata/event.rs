use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::Error;

/// An event handle issued by an [`EventRegistry`].
///
/// The controllability attribute travels with the handle so synthesis code
/// never needs the registry. Two handles from the same registry are equal iff
/// they name the same event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    id: u32,
    controllable: bool,
}

impl Event {
    pub fn id(self) -> u32 {
        self.id
    }

    pub fn is_controllable(self) -> bool {
        self.controllable
    }

    pub fn is_uncontrollable(self) -> bool {
        !self.controllable
    }
}

#[derive(Debug, Clone)]
struct EventInfo {
    name: String,
    controllable: bool,
    origin: String,
}

/// Project-wide event table. Names are unique and carry exactly one
/// controllability attribute.
#[derive(Debug, Clone, Default)]
pub struct EventRegistry {
    events: Vec<EventInfo>,
    by_name: HashMap<String, u32>,
}

impl EventRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name` or returns the existing handle. `origin` is a free-form
    /// location used in clash diagnostics (e.g. `plant.des:3`).
    pub fn declare(&mut self, name: &str, controllable: bool, origin: impl Into<String>) -> Result<Event, Error> {
        let origin = origin.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!("invalid event name {name:?} at {origin}")));
        }
        if let Some(&id) = self.by_name.get(name) {
            let info = &self.events[id as usize];
            if info.controllable != controllable {
                return Err(Error::ControllabilityClash {
                    event: name.to_string(),
                    first: format!("{} ({})", info.origin, kind_word(info.controllable)),
                    second: format!("{} ({})", origin, kind_word(controllable)),
                });
            }
            return Ok(Event { id, controllable });
        }
        let id = self.events.len() as u32;
        self.events.push(EventInfo {
            name: name.to_string(),
            controllable,
            origin,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(Event { id, controllable })
    }

    /// Shorthand for tests and fixtures; panics on a clash.
    pub fn controllable(&mut self, name: &str) -> Event {
        self.declare(name, true, "<builtin>").expect("event clash")
    }

    pub fn uncontrollable(&mut self, name: &str) -> Event {
        self.declare(name, false, "<builtin>").expect("event clash")
    }

    pub fn lookup(&self, name: &str) -> Option<Event> {
        self.by_name.get(name).map(|&id| Event {
            id,
            controllable: self.events[id as usize].controllable,
        })
    }

    pub fn name(&self, event: Event) -> &str {
        &self.events[event.id as usize].name
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Event> + '_ {
        self.events.iter().enumerate().map(|(id, info)| Event {
            id: id as u32,
            controllable: info.controllable,
        })
    }

    /// Renders an event string as space-separated names.
    pub fn format_trace(&self, trace: &[Event]) -> String {
        if trace.is_empty() {
            return "(empty string)".to_string();
        }
        trace.iter().map(|&e| self.name(e)).collect::<Vec<_>>().join(" ")
    }

    pub fn format_alphabet(&self, alphabet: &Alphabet) -> String {
        let mut names: Vec<&str> = alphabet.iter().map(|e| self.name(e)).collect();
        names.sort_unstable();
        format!("{{{}}}", names.join(", "))
    }
}

fn kind_word(controllable: bool) -> &'static str {
    if controllable {
        "controllable"
    } else {
        "uncontrollable"
    }
}

/// A finite set of events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(BTreeSet<Event>);

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, event: Event) -> bool {
        self.0.contains(&event)
    }

    pub fn insert(&mut self, event: Event) -> bool {
        self.0.insert(event)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Event> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &Alphabet) -> Alphabet {
        Alphabet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &Alphabet) -> Alphabet {
        Alphabet(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Alphabet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Alphabet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn uncontrollable(&self) -> Alphabet {
        self.iter().filter(|e| e.is_uncontrollable()).collect()
    }
}

impl FromIterator<Event> for Alphabet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        Alphabet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a Event> for Alphabet {
    fn from_iter<I: IntoIterator<Item = &'a Event>>(iter: I) -> Self {
        Alphabet(iter.into_iter().copied().collect())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redeclaration_is_idempotent() {
        let mut reg = EventRegistry::new();
        let a = reg.declare("a1", true, "x").unwrap();
        let b = reg.declare("a1", true, "y").unwrap();
        assert_eq!(a, b);
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn clash_names_both_declarations() {
        let mut reg = EventRegistry::new();
        reg.declare("b1", false, "m1.des:2").unwrap();
        let err = reg.declare("b1", true, "buf.des:4").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("m1.des:2"), "{msg}");
        assert!(msg.contains("buf.des:4"), "{msg}");
    }

    #[test]
    fn set_operations() {
        let mut reg = EventRegistry::new();
        let (a, b, x, y) = (
            reg.controllable("a"),
            reg.controllable("b"),
            reg.uncontrollable("x"),
            reg.controllable("y"),
        );
        let s: Alphabet = [a, b, x].iter().collect();
        let t: Alphabet = [x, y].iter().collect();
        assert_eq!(s.intersection(&t), [x].iter().collect());
        assert_eq!(s.union(&t).len(), 4);
        assert_eq!(s.difference(&t), [a, b].iter().collect());
        assert_eq!(s.uncontrollable(), [x].iter().collect());
        assert!(!s.is_disjoint(&t));
    }
}
