//! Lightning-plus-polynomial (LP) rational approximation of corner singularities.
//!
//! The crate builds approximations `r_N(z) = Σ a_j/(z - p_j) + b(z)` to `z^α` and
//! `z^α log z` on sectors, measures and fits their root-exponential convergence,
//! and solves Laplace problems on polygons with the same clustered-pole basis.

pub mod analysis;
pub mod corners;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod quadrature;
pub mod textio;

pub use error::{Error, Result};
pub use num_complex::Complex64;
