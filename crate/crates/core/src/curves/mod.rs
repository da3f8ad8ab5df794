//! Bernstein, Bézier and B-spline evaluation, plus the regulated control
//! nets used by the generator's decoder.

mod bspline;
mod net;
mod poly;

use thiserror::Error;

pub use bspline::{
    bspline_basis, bspline_eval, clamped_uniform_knots, greville_abscissae, BSplineSpec, CurveSamples,
};
pub use net::{
    curve_features, default_fit_abscissae, fit_net_y, net_to_distribution, realize_control_net, BranchFeatureGrad,
    DistributionEval, NetKind, RegulatedControlNet, NET_DEGREE, NET_POINTS,
};
pub use poly::SpanBasis;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("basis index {i} out of range for degree {n}")]
    IndexOutOfRange { i: usize, n: usize },
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("expected {expected} free variables, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("x(u) is not invertible on the requested grid")]
    NonMonotoneX,
    #[error("both parametric derivatives vanish at u = {0}")]
    ZeroTangent(f64),
    #[error("need at least two control points")]
    TooFewControlPoints,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

/// Bernstein polynomial `C(n,i) u^i (1-u)^(n-i)`.
pub fn bernstein(i: usize, n: usize, u: f64) -> Result<f64, CurveError> {
    if i > n {
        return Err(CurveError::IndexOutOfRange { i, n });
    }
    Ok(binomial(n, i) * u.powi(i as i32) * (1.0 - u).powi((n - i) as i32))
}

/// Point on the Bézier curve with the given control polygon.
pub fn bezier_eval(control_points: &[(f64, f64)], u: f64) -> Result<(f64, f64), CurveError> {
    if control_points.len() < 2 {
        return Err(CurveError::TooFewControlPoints);
    }
    let n = control_points.len() - 1;
    let mut p = (0.0, 0.0);
    for (i, cp) in control_points.iter().enumerate() {
        let b = bernstein(i, n, u)?;
        p.0 += b * cp.0;
        p.1 += b * cp.1;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_values() {
        assert_eq!(bernstein(0, 3, 0.0).unwrap(), 1.0);
        assert!((bernstein(2, 4, 0.5).unwrap() - 0.375).abs() < 1e-15);
        let s: f64 = (0..=5).map(|i| bernstein(i, 5, 0.37).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(bernstein(4, 3, 0.2), Err(CurveError::IndexOutOfRange { i: 4, n: 3 }));
    }

    #[test]
    fn bezier_linear_and_endpoints() {
        let line = [(0.0, 1.0), (2.0, 3.0)];
        assert_eq!(bezier_eval(&line, 0.5).unwrap(), (1.0, 2.0));
        let cps = [(0.0, 0.0), (0.2, 0.5), (0.7, -0.1), (1.0, 0.3)];
        assert_eq!(bezier_eval(&cps, 0.0).unwrap(), cps[0]);
        let end = bezier_eval(&cps, 1.0).unwrap();
        assert!((end.0 - 1.0).abs() < 1e-15 && (end.1 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn collinear_polygon_stays_on_line() {
        let cps: Vec<(f64, f64)> = [0.0, 0.3, 0.35, 0.9, 1.4].iter().map(|&s| (s, 2.0 * s - 0.5)).collect();
        for k in 0..=50 {
            let (x, y) = bezier_eval(&cps, k as f64 / 50.0).unwrap();
            assert!((y - (2.0 * x - 0.5)).abs() < 1e-14);
        }
    }
}
