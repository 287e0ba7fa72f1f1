//! Decision procedures for distance constraint satisfaction problems.
//!
//! A template here is a finite-degree relational structure over the
//! integers whose relations are invariant under translation. Every relation
//! is stored extensionally as a finite set of offset tuples relative to its
//! first coordinate. On top of that representation the crate provides:
//!
//! * [`analysis`]: Gaifman distance profile, connectivity and the stretch bound;
//! * [`polymorphism`]: the d-modular median and windowed preservation checks;
//! * [`endo`]: eventually periodic endomorphisms, stable numbers, q-reduction;
//! * [`solver`]: path-consistency propagation with greedy witness extraction;
//! * [`brute`]: a complete backtracking oracle over the bounded window;
//! * [`io`]: the JSON documents consumed and produced by the command line.

pub mod analysis;
pub mod brute;
pub mod endo;
mod error;
mod instance;
pub mod io;
mod offset;
pub mod polymorphism;
mod relation;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{Assignment, Constraint, Instance};
pub use offset::OffsetSet;
pub use relation::{Body, RelationDef, Template};
