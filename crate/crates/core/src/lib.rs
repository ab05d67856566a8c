//! Random-matrix laboratory for isotropic unconditional log-concave ensembles.
//!
//! The crate is organised bottom-up:
//!
//! - [`ensembles`]: seeded samplers for Gaussian, Laplace and uniform
//!   ℓ_p-ball matrix laws, plus isotropy calibration.
//! - [`spectral`]: dense kernels (non-symmetric eigenvalues, singular values of
//!   complex shifts through the real embedding, subspace distances).
//! - [`measures`]: empirical spectral measures, Stieltjes transforms and
//!   logarithmic potentials.
//! - [`experiments`]: Monte Carlo suites producing [`experiments::ExperimentReport`]s.
//! - [`io`]: JSON and CSV persistence of reports and dumps.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{LabError, Result};
pub use matrix::{ComplexMatrix, Matrix};
