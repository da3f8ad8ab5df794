use serde::{Deserialize, Serialize};

use super::CurveError;

/// A clamped planar B-spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineSpec {
    pub degree: usize,
    pub control_points: Vec<(f64, f64)>,
    pub knots: Vec<f64>,
}

/// Sampled curve with optional parametric derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveSamples {
    pub u: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub d1: Option<Vec<(f64, f64)>>,
    pub d2: Option<Vec<(f64, f64)>>,
}

/// Clamped knot vector with uniformly spaced internal knots on `[0, 1]`.
pub fn clamped_uniform_knots(n_ctrl: usize, degree: usize) -> Vec<f64> {
    let n_internal = n_ctrl - degree - 1;
    let mut knots = vec![0.0; degree + 1];
    for k in 1..=n_internal {
        knots.push(k as f64 / (n_internal + 1) as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    knots
}

/// Greville abscissae `(u_{i+1} + ... + u_{i+p}) / p`; control points placed
/// at these x-values make `x(u) = u`.
pub fn greville_abscissae(knots: &[f64], degree: usize) -> Vec<f64> {
    let n_ctrl = knots.len() - degree - 1;
    (0..n_ctrl)
        .map(|i| knots[i + 1..=i + degree].iter().sum::<f64>() / degree as f64)
        .collect()
}

fn check_knots(knots: &[f64], degree: usize, n_ctrl: usize) -> Result<(), CurveError> {
    if knots.len() != n_ctrl + degree + 1 {
        return Err(CurveError::InvalidKnots(format!(
            "{} knots for {} control points of degree {}",
            knots.len(),
            n_ctrl,
            degree
        )));
    }
    if knots.windows(2).any(|w| w[1] < w[0]) || knots.iter().any(|k| !k.is_finite()) {
        return Err(CurveError::InvalidKnots("knots must be finite and non-decreasing".into()));
    }
    let m = knots.len() - 1;
    if knots[m] <= knots[0] {
        return Err(CurveError::InvalidKnots("zero-length parameter range".into()));
    }
    Ok(())
}

impl BSplineSpec {
    pub fn new(degree: usize, control_points: Vec<(f64, f64)>, knots: Vec<f64>) -> Result<Self, CurveError> {
        let spec = Self { degree, control_points, knots };
        spec.validate()?;
        Ok(spec)
    }

    /// Clamped uniform spline through the given control polygon.
    pub fn clamped(degree: usize, control_points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if control_points.len() <= degree {
            return Err(CurveError::InvalidKnots("need more control points than the degree".into()));
        }
        let knots = clamped_uniform_knots(control_points.len(), degree);
        Self::new(degree, control_points, knots)
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        check_knots(&self.knots, self.degree, self.control_points.len())?;
        let p = self.degree;
        let (first, last) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if self.knots[..=p].iter().any(|&k| k != first) || self.knots[self.knots.len() - p - 1..].iter().any(|&k| k != last) {
            return Err(CurveError::InvalidKnots("knot vector is not clamped".into()));
        }
        Ok(())
    }

    /// Knot span index with `knots[s] <= u < knots[s+1]`; the last
    /// non-empty span at the right end.
    pub fn find_span(&self, u: f64) -> usize {
        find_span(&self.knots, self.degree, self.control_points.len(), u)
    }

    /// Derivative curve (degree p-1) from the difference control points
    /// `Q_i = p (P_{i+1} - P_i) / (u_{i+p+1} - u_{i+1})`.
    pub fn derivative(&self) -> BSplineSpec {
        let p = self.degree;
        let cps = &self.control_points;
        let q: Vec<(f64, f64)> = (0..cps.len() - 1)
            .map(|i| {
                let den = self.knots[i + p + 1] - self.knots[i + 1];
                let s = if den > 0.0 { p as f64 / den } else { 0.0 };
                (s * (cps[i + 1].0 - cps[i].0), s * (cps[i + 1].1 - cps[i].1))
            })
            .collect();
        BSplineSpec { degree: p - 1, control_points: q, knots: self.knots[1..self.knots.len() - 1].to_vec() }
    }

    pub fn point(&self, u: f64) -> (f64, f64) {
        let p = self.degree;
        let span = self.find_span(u);
        let n = basis_funs(&self.knots, p, span, u);
        let mut out = (0.0, 0.0);
        for (j, b) in n.iter().enumerate() {
            let cp = self.control_points[span - p + j];
            out.0 += b * cp.0;
            out.1 += b * cp.1;
        }
        out
    }
}

pub(crate) fn find_span(knots: &[f64], p: usize, n_ctrl: usize, u: f64) -> usize {
    let n = n_ctrl - 1;
    if u >= knots[n + 1] {
        return n;
    }
    if u <= knots[p] {
        return p;
    }
    // largest s in [p, n] with knots[s] <= u
    let mut lo = p;
    let mut hi = n + 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Non-vanishing basis functions `N_{span-p..=span, p}(u)` (triangular scheme).
pub(crate) fn basis_funs(knots: &[f64], p: usize, span: usize, u: f64) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let tmp = if den != 0.0 { n[r] / den } else { 0.0 };
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    n
}

/// Single basis function `N_{i,p}(u)` by the Cox–de Boor recursion with
/// `0/0 := 0`. At the right end of the parameter range the left limit is
/// taken so clamped curves interpolate their last control point.
pub fn bspline_basis(i: usize, p: usize, u: f64, knots: &[f64]) -> Result<f64, CurveError> {
    if knots.len() < p + 2 || i + p + 1 >= knots.len() {
        return Err(CurveError::InvalidKnots(format!("basis {i} of degree {p} needs knot {}", i + p + 1)));
    }
    if knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(CurveError::InvalidKnots("knots must be non-decreasing".into()));
    }
    let u_end = knots[knots.len() - 1];
    Ok(cox_de_boor(i, p, u, knots, u_end))
}

fn cox_de_boor(i: usize, p: usize, u: f64, knots: &[f64], u_end: f64) -> f64 {
    if p == 0 {
        let (a, b) = (knots[i], knots[i + 1]);
        return if (a <= u && u < b) || (u == u_end && a < b && b == u_end) { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        v += (u - knots[i]) / d1 * cox_de_boor(i, p - 1, u, knots, u_end);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        v += (knots[i + p + 1] - u) / d2 * cox_de_boor(i + 1, p - 1, u, knots, u_end);
    }
    v
}

/// Evaluate a spline at the given parameters, optionally with the first and
/// second parametric derivatives (from the derivative control points).
pub fn bspline_eval(spec: &BSplineSpec, u_values: &[f64], derivatives: usize) -> Result<CurveSamples, CurveError> {
    spec.validate()?;
    let points = u_values.iter().map(|&u| spec.point(u)).collect();
    let mut samples = CurveSamples { u: u_values.to_vec(), points, d1: None, d2: None };
    if derivatives >= 1 && spec.degree >= 1 {
        let d = spec.derivative();
        samples.d1 = Some(u_values.iter().map(|&u| d.point(u)).collect());
        if derivatives >= 2 {
            samples.d2 = Some(if d.degree >= 1 {
                let dd = d.derivative();
                u_values.iter().map(|&u| dd.point(u)).collect()
            } else {
                vec![(0.0, 0.0); u_values.len()]
            });
        }
    }
    Ok(samples)
}
