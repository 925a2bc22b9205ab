//! Generalized analytic Feynman integrals, Fourier–Feynman transforms and
//! first variations of cylinder functionals on Wiener space, with
//! integration-by-parts identities checked from both sides.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod cylinder;
pub mod error;
pub mod expr;
pub mod feynman;
pub mod gauss_poly;
pub mod gfft;
pub mod l2;
pub mod paths;
pub mod report;
pub mod theorems;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
