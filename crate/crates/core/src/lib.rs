//! Exact integer-point counting in anisotropically expanded domains.

#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod counting;
pub mod domains;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod scalar;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{build_subspace, dual_basis, integer_kernel, DualLattice, IntegerLattice, SubspaceData};
pub use scalar::{QuadScalar, Rational};

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
