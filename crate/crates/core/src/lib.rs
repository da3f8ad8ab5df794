//! Physics-aware variational-autoencoder airfoil parameterization.
//!
//! The crate is organised around the pipeline an airfoil goes through:
//!
//! * [`geom`] ingests coordinate files, resamples them onto the shared cosine
//!   grid, splits them into thickness/camber and extracts geometric features.
//! * [`curves`] holds the Bernstein/Bézier/B-spline math and the regulated
//!   control nets that make every generated thickness distribution non-negative.
//! * [`baselines`] implements PARSEC, CST, Bézier and SVD parameterizations.
//! * [`vae`] is the two-branch generator with its loss terms and checkpoints.
//! * [`train`] runs the optimizer, the grid search and latent diagnostics.
//! * [`eval`] reproduces the comparison metrics (inverse fitting, feasibility,
//!   correlation tables, traversals and constrained generation).
//! * [`aso`] is the genetic-algorithm shape optimizer and its solver coupling.

pub mod aso;
pub mod baselines;
pub mod curves;
pub mod eval;
pub mod geom;
pub mod io;
pub mod param;
pub mod stats;
pub mod train;
pub mod vae;

pub use geom::{AirfoilSection, GeometricFeatures, ThicknessCamber};
pub use param::{DesignVector, Parameterization};
