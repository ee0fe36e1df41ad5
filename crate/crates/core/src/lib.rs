// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod quadrature;
pub mod spectral_basis;
pub mod h_fourier;
pub mod coefficients;
pub mod integrator;
pub mod mode_solver;
pub mod cauchy_engine;
pub mod vws_harness;
