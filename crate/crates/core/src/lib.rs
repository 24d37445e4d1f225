//! Multipartite entanglement measures and separability tests for small
//! finite-dimensional quantum states.
//!
//! Numerical kernels are generic over the real scalar (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, which is what the CLI and the
//! verification suites use.

pub mod cft;
pub mod error;
pub mod linalg;
pub mod qstate;
pub mod replica;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod separability;
pub mod states;
pub mod tangle2;
pub mod tangle3;
pub mod tangle4;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
pub use scalar::{Real, C};

/// Complex `f64`.
pub type Complex64 = num_complex::Complex<f64>;
/// Pure state over `f64`.
pub type State = qstate::PureState<f64>;
/// Density matrix over `f64`.
pub type Density = qstate::DensityMatrix<f64>;
/// Dense complex matrix over `f64`.
pub type Matrix = linalg::CMatrix<f64>;
