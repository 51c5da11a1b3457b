//! Hierarchical nonblocking supervisory control synthesis for modular
//! discrete-event systems, with Markov clustering to group supervisors and
//! abstractions level by level.

pub mod abstraction;
pub mod automata;
pub mod clustering;
pub mod error;
pub mod fixtures;
pub mod hierarchy;
pub mod io;
pub mod project;
#[cfg(feature = "random")]
pub mod random;
pub mod synthesis;
pub mod verify;

pub use automata::{Alphabet, Automaton, AutomatonBuilder, Event, EventRegistry, StateId};
pub use error::{Error, Result};
pub use project::Project;
