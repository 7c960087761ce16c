//! Moment-constraint certificates for Frobenius trace statistics.
//!
//! Exact rational and high-precision real arithmetic, bivariate polynomials,
//! moment systems, support regions, constrained global minimization, a small
//! simplex kernel, certificate verification and threshold search.

pub mod certify;
pub mod data;
pub mod error;
pub mod exact;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod moments;
pub mod optimize;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod plot;
pub mod poly;
pub mod region;
pub mod threshold;

pub use error::{Error, Result};
pub use exact::{BigReal, Rational};
pub use poly::{Monomial, Poly2};
pub use region::{Region, SymmetricAtom};
