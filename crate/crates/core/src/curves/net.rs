//! Regulated B-spline control nets.
//!
//! A thickness or camber distribution is a clamped cubic B-spline with 12
//! control points whose coordinates are assembled from unconstrained
//! "free variables":
//!
//! * x-coordinates come from non-negative increments `|v|` normalised to a
//!   unit sum, so `0 = x_1 <= ... <= x_N = 1` always holds;
//! * thickness nets additionally pin `x_2 = 0` (round nose) and take `|v|`
//!   for every interior y, so the curve, a convex combination of
//!   non-negative ordinates, can never dip below zero.
//!
//! Free-variable layout: the x-part holds one slot per point from the last
//! pinned-at-zero point onward (`N - 1` slots for thickness, `N` for
//! camber); its first slot belongs to that pinned point and is ignored. The
//! y-part holds the `N - 2` interior ordinates.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::poly::{horner3, SpanBasis};
use super::{clamped_uniform_knots, greville_abscissae, CurveError};
use crate::geom::GeometricFeatures;

pub const NET_POINTS: usize = 12;
pub const NET_DEGREE: usize = 3;
/// Parametric samples used for the max-thickness/camber search.
const FEATURE_SAMPLES: usize = 201;
/// Radius reported when the nose curvature vanishes.
const R_LE_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetKind {
    Thickness,
    Camber,
}

impl NetKind {
    /// Points pinned at `x = 0`.
    fn pinned(self) -> usize {
        match self {
            NetKind::Thickness => 2,
            NetKind::Camber => 1,
        }
    }

    fn x_slots(self) -> usize {
        NET_POINTS - self.pinned() + 1
    }

    /// Length of the free-variable vector: `2N - 3` or `2N - 2`.
    pub fn free_len(self) -> usize {
        self.x_slots() + NET_POINTS - 2
    }
}

/// A control net realised from free variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegulatedControlNet {
    pub kind: NetKind,
    pub free_vars: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

struct NetBasis {
    spans: Vec<SpanBasis>,
    /// `(span index into spans, basis values)` at the dense feature samples.
    dense: Vec<(usize, Vec<f64>)>,
    /// First and second derivatives of all N basis functions at u = 0 and u = 1.
    d_start: ([f64; NET_POINTS], [f64; NET_POINTS]),
    d_end: ([f64; NET_POINTS], [f64; NET_POINTS]),
}

fn net_basis() -> &'static NetBasis {
    static BASIS: OnceLock<NetBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let knots = clamped_uniform_knots(NET_POINTS, NET_DEGREE);
        let spans: Vec<SpanBasis> =
            (NET_DEGREE..NET_POINTS).map(|s| SpanBasis::new(&knots, NET_DEGREE, s)).collect();
        let dense = (0..FEATURE_SAMPLES)
            .map(|k| {
                let u = k as f64 / (FEATURE_SAMPLES - 1) as f64;
                let (si, t) = locate(&spans, u);
                (si, spans[si].eval(t).0)
            })
            .collect();
        let ders_at = |si: usize, t: f64| {
            let sb = &spans[si];
            let (_, d1, d2) = sb.eval(t);
            let mut a = [0.0; NET_POINTS];
            let mut b = [0.0; NET_POINTS];
            for j in 0..d1.len() {
                a[sb.first_index() + j] = d1[j];
                b[sb.first_index() + j] = d2[j];
            }
            (a, b)
        };
        let last = spans.len() - 1;
        let d_start = ders_at(0, 0.0);
        let d_end = ders_at(last, spans[last].end - spans[last].start);
        NetBasis { spans, dense, d_start, d_end }
    })
}

fn locate(spans: &[SpanBasis], u: f64) -> (usize, f64) {
    let si = spans.iter().position(|s| u < s.end).unwrap_or(spans.len() - 1);
    (si, (u - spans[si].start).min(spans[si].end - spans[si].start))
}

/// Assemble control points from free variables.
pub fn realize_control_net(kind: NetKind, free_vars: &[f64]) -> Result<RegulatedControlNet, CurveError> {
    if free_vars.len() != kind.free_len() {
        return Err(CurveError::LengthMismatch { expected: kind.free_len(), got: free_vars.len() });
    }
    let p = kind.pinned();
    let k = kind.x_slots();
    let incr: Vec<f64> = free_vars[1..k].iter().map(|v| v.abs()).collect();
    let total: f64 = incr.iter().sum();
    let mut x = vec![0.0; NET_POINTS];
    if total > 0.0 {
        let mut acc = 0.0;
        for (j, d) in incr.iter().enumerate() {
            acc += d;
            x[p + j] = acc / total;
        }
    } else {
        for j in 0..incr.len() {
            x[p + j] = (j + 1) as f64 / incr.len() as f64;
        }
    }
    x[NET_POINTS - 1] = 1.0;

    let mut y = vec![0.0; NET_POINTS];
    for (j, v) in free_vars[k..].iter().enumerate() {
        y[j + 1] = match kind {
            NetKind::Thickness => v.abs(),
            NetKind::Camber => *v,
        };
    }
    Ok(RegulatedControlNet { kind, free_vars: free_vars.to_vec(), x, y })
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl RegulatedControlNet {
    /// Build a net from explicit control coordinates, deriving free variables
    /// that reproduce them. Coordinates must satisfy the net invariants.
    pub fn from_points(kind: NetKind, x: &[f64], y: &[f64]) -> Result<Self, CurveError> {
        if x.len() != NET_POINTS || y.len() != NET_POINTS {
            return Err(CurveError::LengthMismatch { expected: NET_POINTS, got: x.len().min(y.len()) });
        }
        let p = kind.pinned();
        let mut free = vec![0.0; kind.free_len()];
        for j in p..NET_POINTS {
            free[j - p + 1] = x[j] - x[j - 1];
        }
        let k = kind.x_slots();
        free[k..].copy_from_slice(&y[1..NET_POINTS - 1]);
        realize_control_net(kind, &free)
    }

    /// Check every structural invariant of the net.
    pub fn check_invariants(&self) -> bool {
        let x_ok = self.x[0] == 0.0
            && self.x[NET_POINTS - 1] == 1.0
            && self.x.windows(2).all(|w| w[1] >= w[0]);
        let y_ok = self.y[0] == 0.0 && self.y[NET_POINTS - 1] == 0.0;
        let kind_ok = match self.kind {
            NetKind::Thickness => self.x[1] == 0.0 && self.y.iter().all(|&v| v >= 0.0),
            NetKind::Camber => true,
        };
        x_ok && y_ok && kind_ok && self.free_vars.len() == self.kind.free_len()
    }

    pub fn control_points(&self) -> Vec<(f64, f64)> {
        self.x.iter().copied().zip(self.y.iter().copied()).collect()
    }

    /// Chain gradients with respect to control coordinates back to the free
    /// variables (subgradient of `|v|` at zero is zero).
    pub fn backward(&self, grad_x: &[f64], grad_y: &[f64]) -> Vec<f64> {
        let kind = self.kind;
        let p = kind.pinned();
        let k = kind.x_slots();
        let mut g = vec![0.0; kind.free_len()];
        let v = &self.free_vars;
        let total: f64 = v[1..k].iter().map(|a| a.abs()).sum();
        if total > 0.0 {
            // x[p+m] = C_m / S for m = 0..k-1 (the last one is exactly 1)
            let mut weighted = 0.0;
            for m in 0..k - 1 {
                weighted += grad_x[p + m] * self.x[p + m];
            }
            let mut tail = 0.0;
            for m in (0..k - 1).rev() {
                tail += grad_x[p + m];
                let dd = (tail - weighted) / total;
                g[m + 1] = dd * sign0(v[m + 1]);
            }
        }
        for j in 0..NET_POINTS - 2 {
            let gy = grad_y[j + 1];
            g[k + j] = match kind {
                NetKind::Thickness => gy * sign0(v[k + j]),
                NetKind::Camber => gy,
            };
        }
        g
    }

    /// Per-span power-basis polynomials of x(u) and y(u).
    fn span_polys(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        net_basis().spans.iter().map(|s| (s.combine(&self.x), s.combine(&self.y))).collect()
    }

    /// Point and first/second parametric derivatives at `u`.
    pub fn eval(&self, u: f64) -> [(f64, f64); 3] {
        let spans = &net_basis().spans;
        let (si, t) = locate(spans, u);
        let (xp, yp) = (spans[si].combine(&self.x), spans[si].combine(&self.y));
        let (x0, x1, x2) = horner3(&xp, t);
        let (y0, y1, y2) = horner3(&yp, t);
        [(x0, y0), (x1, y1), (x2, y2)]
    }

    /// Features of this branch with gradients: `(t_max, r_le)` for thickness
    /// nets, `(m_max, gamma_te)` for camber nets.
    pub fn features_with_grad(&self) -> BranchFeatureGrad {
        let basis = net_basis();
        let mut out = BranchFeatureGrad::default();

        let (mut best, mut best_k) = (f64::NEG_INFINITY, 0);
        for (k, (si, vals)) in basis.dense.iter().enumerate() {
            let first = basis.spans[*si].first_index();
            let v: f64 = vals.iter().enumerate().map(|(j, b)| b * self.y[first + j]).sum();
            if v > best {
                best = v;
                best_k = k;
            }
        }
        out.values[0] = best;
        let (si, vals) = &basis.dense[best_k];
        let first = basis.spans[*si].first_index();
        for (j, b) in vals.iter().enumerate() {
            out.grad_y[0][first + j] = *b;
        }

        let dot = |w: &[f64; NET_POINTS], c: &[f64]| w.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        match self.kind {
            NetKind::Thickness => {
                let (d1, d2) = &basis.d_start;
                let xp = dot(d1, &self.x);
                let yp = 0.5 * dot(d1, &self.y);
                let xpp = dot(d2, &self.x);
                let ypp = 0.5 * dot(d2, &self.y);
                let a = xp * xp + yp * yp;
                let d = xp * ypp - yp * xpp;
                if a <= 0.0 {
                    out.values[1] = 0.0;
                    out.degenerate = true;
                } else if d.abs() < 1e-300 || a.powf(1.5) / d.abs() > R_LE_CAP {
                    out.values[1] = R_LE_CAP;
                    out.degenerate = true;
                } else {
                    let r = a.powf(1.5) / d.abs();
                    out.values[1] = r;
                    let sd = sign0(d);
                    // partials of r = A^{3/2} / |D|
                    let dr_da = 1.5 * a.sqrt() / d.abs();
                    let dr_dd = -r * sd / d.abs();
                    let g_xp = dr_da * 2.0 * xp + dr_dd * ypp;
                    let g_yp = dr_da * 2.0 * yp + dr_dd * (-xpp);
                    let g_xpp = dr_dd * (-yp);
                    let g_ypp = dr_dd * xp;
                    for j in 0..NET_POINTS {
                        out.grad_x[1][j] = g_xp * d1[j] + g_xpp * d2[j];
                        out.grad_y[1][j] = 0.5 * (g_yp * d1[j] + g_ypp * d2[j]);
                    }
                }
            }
            NetKind::Camber => {
                let (d1, _) = &basis.d_end;
                let xp = dot(d1, &self.x);
                let yp = dot(d1, &self.y);
                let a = xp * xp + yp * yp;
                out.values[1] = (-yp).atan2(xp);
                if a > 0.0 {
                    let g_xp = yp / a;
                    let g_yp = -xp / a;
                    for j in 0..NET_POINTS {
                        out.grad_x[1][j] = g_xp * d1[j];
                        out.grad_y[1][j] = g_yp * d1[j];
                    }
                } else {
                    out.degenerate = true;
                }
            }
        }
        out
    }
}

/// Two features of one branch with their gradients with respect to the
/// control coordinates.
#[derive(Debug, Clone, Default)]
pub struct BranchFeatureGrad {
    pub values: [f64; 2],
    pub grad_x: [[f64; NET_POINTS]; 2],
    pub grad_y: [[f64; NET_POINTS]; 2],
    /// Set when a derivative vanished and a fallback value was used.
    pub degenerate: bool,
}

/// Geometric features straight from the curves: dense-sample maxima, the
/// camber tangent at the TE and the nose radius `1/kappa` of the
/// half-thickness curve `(x(u), t(u)/2)` at `u = 0`.
pub fn curve_features(
    t_net: &RegulatedControlNet,
    c_net: &RegulatedControlNet,
) -> Result<GeometricFeatures, CurveError> {
    let [_, (tx1, ty1), _] = t_net.eval(0.0);
    if tx1 == 0.0 && ty1 == 0.0 {
        return Err(CurveError::ZeroTangent(0.0));
    }
    let [_, (cx1, cy1), _] = c_net.eval(1.0);
    if cx1 == 0.0 && cy1 == 0.0 {
        return Err(CurveError::ZeroTangent(1.0));
    }
    let tf = t_net.features_with_grad();
    let cf = c_net.features_with_grad();
    Ok(GeometricFeatures::new(cf.values[0], cf.values[1], tf.values[0], tf.values[1]))
}

/// Grid samples of a net with what the backward pass needs.
#[derive(Debug, Clone)]
pub struct DistributionEval {
    pub values: Vec<f64>,
    /// `(span, basis values, y'(u)/x'(u))` per grid point; `None` at the
    /// pinned endpoints.
    points: Vec<Option<(usize, [f64; NET_DEGREE + 1], f64)>>,
}

impl DistributionEval {
    /// Gradients with respect to control x and y given `dL/dvalues`.
    pub fn backward(&self, grad_values: &[f64]) -> ([f64; NET_POINTS], [f64; NET_POINTS]) {
        let spans = &net_basis().spans;
        let mut gx = [0.0; NET_POINTS];
        let mut gy = [0.0; NET_POINTS];
        for (g, pt) in grad_values.iter().zip(&self.points) {
            if let Some((si, n, ratio)) = pt {
                let first = spans[*si].first_index();
                for j in 0..=NET_DEGREE {
                    gy[first + j] += g * n[j];
                    gx[first + j] -= g * ratio * n[j];
                }
            }
        }
        (gx, gy)
    }
}

/// Sample the net's curve on an x-grid by inverting the monotone `x(u)`.
pub fn net_to_distribution(net: &RegulatedControlNet, grid: &[f64]) -> Result<DistributionEval, CurveError> {
    let polys = net.span_polys();
    let spans = &net_basis().spans;
    let ends: Vec<(f64, f64)> = polys
        .iter()
        .zip(spans)
        .map(|((xp, _), s)| (xp[0], horner3(xp, s.end - s.start).0))
        .collect();
    if ends.iter().any(|(a, b)| b < &(a - 1e-12)) {
        return Err(CurveError::NonMonotoneX);
    }
    let last = polys.len() - 1;
    let mut values = Vec::with_capacity(grid.len());
    let mut points = Vec::with_capacity(grid.len());
    let mut si = 0;
    for &xg in grid {
        if xg <= 0.0 {
            values.push(net.y[0]);
            points.push(None);
            continue;
        }
        if xg >= 1.0 {
            values.push(net.y[NET_POINTS - 1]);
            points.push(None);
            continue;
        }
        while si < last && ends[si].1 < xg {
            si += 1;
        }
        let (xp, yp) = &polys[si];
        let h = spans[si].end - spans[si].start;
        let t = solve_monotone_cubic(xp, xg, h);
        let (y, dy, _) = horner3(yp, t);
        let (_, dx, _) = horner3(xp, t);
        let (n, _, _) = spans[si].eval(t);
        let ratio = if dx.abs() > 1e-14 { dy / dx } else { 0.0 };
        values.push(y);
        points.push(Some((si, [n[0], n[1], n[2], n[3]], ratio)));
    }
    Ok(DistributionEval { values, points })
}

/// Root of the non-decreasing cubic `p(t) = target` on `[0, h]` by Newton
/// iteration safeguarded with bisection.
fn solve_monotone_cubic(p: &[f64], target: f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    let f_lo = p[0] - target;
    let f_hi = horner3(p, h).0 - target;
    if f_lo >= 0.0 {
        return 0.0;
    }
    if f_hi <= 0.0 {
        return h;
    }
    let mut t = h * (-f_lo) / (f_hi - f_lo);
    for _ in 0..200 {
        let (v, d, _) = horner3(p, t);
        let f = v - target;
        if f == 0.0 {
            return t;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= 1e-15 * h.max(1.0) {
            break;
        }
        let newton = if d > 0.0 { t - f / d } else { f64::NAN };
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    t
}

/// Least-squares fit of the interior control ordinates for fixed control
/// abscissae, so that the net's grid samples match `target`. Thickness
/// ordinates that come out negative are reflected by the `|v|` regulation.
pub fn fit_net_y(
    kind: NetKind,
    control_x: &[f64],
    grid: &[f64],
    target: &[f64],
) -> Result<RegulatedControlNet, CurveError> {
    let probe = RegulatedControlNet::from_points(kind, control_x, &[0.0; NET_POINTS])?;
    let n_free = NET_POINTS - 2;
    // design matrix column j = grid response to a unit interior ordinate j
    let mut cols = Vec::with_capacity(n_free);
    for j in 1..NET_POINTS - 1 {
        let mut y = [0.0; NET_POINTS];
        y[j] = 1.0;
        let mut net = probe.clone();
        net.y = y.to_vec();
        cols.push(net_to_distribution(&net, grid)?.values);
    }
    let a = nalgebra::DMatrix::from_fn(grid.len(), n_free, |i, j| cols[j][i]);
    let b = nalgebra::DVector::from_column_slice(target);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|_| CurveError::NonMonotoneX)?;
    let mut y = vec![0.0; NET_POINTS];
    for j in 0..n_free {
        y[j + 1] = sol[j];
    }
    RegulatedControlNet::from_points(kind, control_x, &y)
}

/// Default control abscissae for fitting: quadratic clustering at the nose
/// for thickness nets, Greville abscissae (so `x(u) = u`) for camber nets.
pub fn default_fit_abscissae(kind: NetKind) -> Vec<f64> {
    match kind {
        NetKind::Camber => greville_abscissae(&clamped_uniform_knots(NET_POINTS, NET_DEGREE), NET_DEGREE),
        NetKind::Thickness => {
            let mut x = vec![0.0; NET_POINTS];
            for (j, xj) in x.iter_mut().enumerate().skip(1) {
                *xj = ((j - 1) as f64 / (NET_POINTS - 2) as f64).powi(2);
            }
            x
        }
    }
}
