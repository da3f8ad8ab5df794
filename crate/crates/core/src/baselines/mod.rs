//! Classical parameterizations used as comparison baselines, and
//! dataset-derived design-variable bounds.

mod bezier;
mod bounds;
mod cst;
mod parsec;
mod registry;
mod svd;

pub use bezier::{Bezier10, BEZIER_X};
pub use bounds::derive_bounds;
pub use cst::Cst;
pub use parsec::{parsec_condition, parsec_eval, parsec_features, parsec_solve, Parsec, ParsecCoefficients, ParsecVars};
pub use registry::{build_baseline, BaselineKind};
pub use svd::{svd_eval, svd_fit, SvdModel};

use nalgebra::{DMatrix, DVector};

use crate::param::ParamError;

/// Minimum-norm least-squares solution of `a x = b`.
pub(crate) fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, ParamError> {
    a.clone()
        .svd(true, true)
        .solve(b, 1e-13)
        .map_err(|_| ParamError::SingularSystem(f64::INFINITY))
}
