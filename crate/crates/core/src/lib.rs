//! Solvers for the Euler-Darboux equation
//!
//! ```text
//! U_xy + β/(y−x) U_x − α/(y−x) U_y = 0,   |α| = |β| = 1/2,
//! ```
//!
//! covering the three modified Cauchy problems posed on the singular line
//! `y = x`, their limit functionals, the Riemann function of the symmetric
//! case, a finite-difference march used as an independent oracle, and the
//! quadrant problem with displaced boundary conditions and conjugation on the
//! diagonal.

pub mod cauchy;
pub mod delta;
pub mod epd;
pub mod error;
pub mod expr;
pub mod oracle_fd;
pub mod quad;
pub mod riemann;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::{Jet, Real, Taylor2};

/// Degree-3 jet over `f64`.
pub type Jet64 = Jet<f64>;
/// Second-order bivariate expansion over `f64`.
pub type Taylor64 = Taylor2<f64>;
