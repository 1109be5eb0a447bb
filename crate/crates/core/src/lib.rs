//! Periodic fractional derivatives with sliding fixed memory, computed with a
//! Fourier-Gegenbauer pseudospectral (FGPS) integration matrix, plus a priori
//! error estimates and a collocation solver for periodic fractional optimal
//! control problems.
//!
//! Module map:
//!
//! - [`gegenbauer`]: Gegenbauer-Gauss nodes and interpolatory integration weights.
//! - [`fourier`]: the periodic grid and trigonometric Lagrange cardinal basis.
//! - [`fracdiff`]: the Toeplitz fractional integration matrix and its application.
//! - [`reference`]: exact and quadrature-based reference values.
//! - [`error_bounds`]: γ factor, ψ coefficients and the trend bound estimator.
//! - [`ocp`]: problem definition, collocation, the NLP solver and result post-processing.

pub mod error;
pub mod error_bounds;
pub mod fourier;
pub mod fracdiff;
pub mod gegenbauer;
pub mod ocp;
pub mod reference;
pub mod special;

pub use error::{FgpsError, Result};
pub use fourier::PeriodicGrid;
pub use fracdiff::FgpsOperator;
pub use gegenbauer::GegenbauerRule;
