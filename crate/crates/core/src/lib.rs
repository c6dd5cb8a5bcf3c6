//! Dyck automata, their shifts and conjugacy between them.

pub mod constructions;
pub mod corpus;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod language;
pub mod locality;
pub mod model;
pub mod path;
pub mod surgery;

pub use error::{Error, Result};
pub use model::{BlockMapSpec, DyckAutomaton, DyckGraph, Edge, Kind, Partition, Side, Symbol, TriAlphabet, Word};
