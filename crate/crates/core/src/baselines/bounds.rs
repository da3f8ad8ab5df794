use crate::geom::AirfoilSection;
use crate::param::{DesignVector, ParamError, Parameterization};
use crate::stats::percentile;

/// Share of dataset fits allowed to fail before bounds are refused.
const MAX_FAILURE_SHARE: f64 = 0.1;

/// Half-width given to a variable that every fit puts at the same value
/// (e.g. trailing-edge thickness on a closed-TE corpus).
const DEGENERATE_HALF_WIDTH: f64 = 1e-9;

/// Per-variable `[p0.3, p99.7]` box over the design vectors fitted to every
/// section. A collapsed column becomes a hair-width box, pinning the variable;
/// if every column collapses the dataset carries no shape variation at all.
pub fn derive_bounds(param: &dyn Parameterization, sections: &[AirfoilSection]) -> Result<Vec<(f64, f64)>, ParamError> {
    let total = sections.len();
    let fits: Vec<DesignVector> = sections
        .iter()
        .filter_map(|s| param.fit(s).ok())
        .filter(|dv| dv.values.iter().all(|v| v.is_finite()))
        .collect();
    let failed = total - fits.len();
    if total == 0 || failed as f64 > MAX_FAILURE_SHARE * total as f64 {
        return Err(ParamError::FitFailure { failed, total });
    }
    let mut bounds = Vec::with_capacity(param.n_dv());
    let mut collapsed = 0;
    for j in 0..param.n_dv() {
        let col: Vec<f64> = fits.iter().map(|dv| dv.values[j]).collect();
        let (lo, hi) = (percentile(&col, 0.3), percentile(&col, 99.7));
        if lo < hi {
            bounds.push((lo, hi));
        } else {
            collapsed += 1;
            let w = DEGENERATE_HALF_WIDTH * lo.abs().max(1.0);
            bounds.push((lo - w, lo + w));
        }
    }
    if collapsed == bounds.len() {
        return Err(ParamError::FitFailure { failed: total, total });
    }
    Ok(bounds)
}
