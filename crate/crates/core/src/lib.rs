//! Covariance estimation from linearly-correlated Gaussian samples.
//!
//! Samples `Y = X Λ` are formed from independent Gaussian columns `X` and a
//! fixed mixing matrix `Λ`. The sample covariance `Σ̂ = (1/m) Y Yᵀ` is then a
//! compound Wishart matrix with shape parameter `B = Λ Λᵀ`. This crate
//! provides:
//!
//! * [`linalg`]: the small dense symmetric toolkit everything else uses,
//! * [`shape`]: the correlation models (identity, Toeplitz, all-ones, random diagonal),
//! * [`sampling`]: seedable Gaussian sample generation with splittable streams,
//! * [`estimator`]: the correlated sample covariance and its error metrics,
//! * [`bounds`]: closed-form non-asymptotic error bounds and comparison bounds,
//! * [`experiments`]: Monte Carlo drivers for sample-complexity and error-decay studies,
//! * [`io`]: CSV, JSON and SVG output.

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod shape;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SpdMatrix};
pub use shape::{ModelDescriptor, ShapeKind, ShapeModel};
