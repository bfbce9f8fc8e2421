//! Multimode extended Josephson junction modeling: mode structure, Fock-space
//! Hamiltonians, resonator coupling, driven dynamics, lattices of junctions and
//! soliton tails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupling;
pub mod diagnostics;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fock;
pub mod jhamiltonian;
pub mod lattice;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod soliton;
pub mod units;

pub use error::{Error, Result};
