//! Small dense complex linear algebra: matrices, Hermitian eigensolver, SVD.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{hermitian_eig, psd_sqrt, HermitianSpectrum};
pub use matrix::{trace_power, CMatrix};
pub use svd::{svd, Svd};
