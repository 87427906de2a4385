//! Exact-arithmetic and relation-lattice kernel.

pub mod bitrel;
pub mod carrier;
pub mod fixpoint;
pub mod rational;
pub mod semilattice;
pub mod subspace;

pub use bitrel::BitRel;
pub use carrier::{
    all_subsets, check_mask, full_mask, members, Carrier, Mask, DEFAULT_POWERSET_CAP,
};
pub use fixpoint::{gfp, Fixpoint, Lattice};
pub use rational::{QVector, Rational};
pub use semilattice::Semilattice;
pub use subspace::{echelonize, Subspace};
