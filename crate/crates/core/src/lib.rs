//! Observational entropy as a chaos diagnostic for the quantum kicked top.
//!
//! The crate builds spin-`j` operators and coherent states, the kicked-top
//! Floquet operator, coarse-grainings over the `J_z` eigenbasis with their
//! observational entropy, and the OTOC/FOTOC diagnostics it is compared
//! against. [`experiments`] wires these into reproducible, seeded runs.

pub mod classical_map;
pub mod diagnostics;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod kicked_top;
pub mod linalg;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector, C64};
pub use spin_algebra::{Axis, SpinSpace};
