//! Deterministic generators and the language-level operations the synthesis
//! pipeline is built from.

mod automaton;
mod event;
pub mod language;
mod ops;
mod product;
mod projection;

pub use automaton::{Automaton, AutomatonBuilder, StateId};
pub use event::{Alphabet, Event, EventRegistry};
pub use ops::{coreachable, is_nonblocking, is_trim, reachable, restrict, trim};
pub use product::{sync_all, sync_product, sync_product_with_origins};
pub use projection::natural_projection;

pub(crate) use ops::coreachable_within;
pub(crate) use projection::{check_observable, SubsetDfa};
