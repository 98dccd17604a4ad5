//! Bilinear finite elements for the 2D obstacle problem with a guaranteed,
//! fully computable upper bound (functional majorant) for the energy error.
//!
//! The pipeline of one run:
//!
//! 1. [`mesh`]: uniform rectangular meshes, refinement, disk rectangulations;
//! 2. [`fem`]: Q1 and RT0 element matrices and global assembly into
//!    [`sparse`] matrices;
//! 3. [`qp`]: the discrete obstacle problem, solved by projected SOR;
//! 4. [`majorant`]: alternating minimization of the majorant over flux,
//!    multiplier and weight;
//! 5. [`error_metrics`]: the true error against the [`benchmarks`] and the
//!    inequality chain.
//!
//! [`experiment`] wires these together; [`io`] writes the artifacts.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod error;
pub mod error_metrics;
pub mod experiment;
pub mod fem;
pub mod field;
pub mod io;
pub mod majorant;
pub mod mesh;
pub mod qp;
pub mod sparse;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/mesh.md")]
    mod mesh {}
    #[doc = include_str!("../../../book/src/fem.md")]
    mod fem {}
    #[doc = include_str!("../../../book/src/obstacle_qp.md")]
    mod obstacle_qp {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/majorant.md")]
    mod majorant {}
    #[doc = include_str!("../../../book/src/error_metrics.md")]
    mod error_metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/limitations.md")]
    mod limitations {}
}
