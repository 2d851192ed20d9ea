//! Synchronizing automata: reset words, exact reset thresholds, the cone and
//! digraph-growth machinery behind quadratic reset-threshold bounds, and a
//! harness that checks the underlying facts on concrete instances.
//!
//! States are 0-based internally and 1-based in every textual form.

pub mod automaton;
pub mod cone;
pub mod error;
pub mod format;
pub mod generators;
pub mod growth;
pub mod linalg;
pub mod perm;
pub mod synthesis;
pub mod verify;

pub use automaton::{Automaton, LetterId, ResetThreshold, StateSet, Word};
pub use error::{Error, Result};
pub use format::{emit_automaton, parse_automaton};
pub use perm::{PermSet, Permutation};
