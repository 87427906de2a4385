//! Behavioural equivalence, liftings, quotients and modal logics for finite
//! systems with side effects: nondeterministic and weighted automata,
//! conditional transition systems and LTSs with semilattice outputs.

pub mod equivalence;
mod error;
pub mod format;
pub mod kernel;
pub mod liftings;
pub mod logic;
pub mod quotient;
pub mod random;
pub mod rng;
pub mod systems;

pub use error::{Error, Result};
pub use kernel::{BitRel, Carrier, Mask, QVector, Rational, Semilattice, Subspace};
pub use systems::{Cts, Lts, Lwa, MooreSemantics, Nda, OutputLts};
