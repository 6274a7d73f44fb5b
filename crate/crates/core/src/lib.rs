//! Trace tests for completeness of partial solution sets of sparse
//! polynomial systems on the algebraic torus.
//!
//! The exact layer (supports, lattices, offsets, mixed volumes) uses
//! arbitrary-precision integers and rationals. The numeric layer
//! (systems, tracking, solving, trace tests) is generic over [`scalar::Real`];
//! the aliases below fix it to `f64`.

// Float checks are written as `!(x > y)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod linalg;
pub mod mixedvol;
pub mod polysys;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod supports;
pub mod tracetest;
pub mod tracker;

pub use error::{Error, Result};

pub type System = polysys::SparseSystem<f64>;
pub type Point = polysys::TorusPoint<f64>;
pub type Solutions = solver::SolutionSet<f64>;
pub type Complex = scalar::C<f64>;
