use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::geom::{cosine_grid, AirfoilSection};
use crate::param::{DesignVector, ParamError, Parameterization};

/// Condition number above which a PARSEC system is treated as singular.
pub const PARSEC_COND_LIMIT: f64 = 1e12;
const PARSEC_COND_WARN: f64 = 1e8;

/// The twelve PARSEC variables: separate nose radii per surface, crest
/// position/height/curvature per surface and four trailing-edge values.
/// Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsecVars {
    pub r_le_upper: f64,
    pub r_le_lower: f64,
    pub x_upper: f64,
    pub y_upper: f64,
    pub yxx_upper: f64,
    pub x_lower: f64,
    pub y_lower: f64,
    pub yxx_lower: f64,
    pub y_te: f64,
    pub dy_te: f64,
    pub alpha_te: f64,
    pub beta_te: f64,
}

impl ParsecVars {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.r_le_upper,
            self.r_le_lower,
            self.x_upper,
            self.y_upper,
            self.yxx_upper,
            self.x_lower,
            self.y_lower,
            self.yxx_lower,
            self.y_te,
            self.dy_te,
            self.alpha_te,
            self.beta_te,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            r_le_upper: v[0],
            r_le_lower: v[1],
            x_upper: v[2],
            y_upper: v[3],
            yxx_upper: v[4],
            x_lower: v[5],
            y_lower: v[6],
            yxx_lower: v[7],
            y_te: v[8],
            dy_te: v[9],
            alpha_te: v[10],
            beta_te: v[11],
        }
    }
}

/// Coefficients of `Y = sum a_i x^(i - 1/2)`, `i = 1..=6`, per surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsecCoefficients {
    pub upper: [f64; 6],
    pub lower: [f64; 6],
}

fn exps() -> [f64; 6] {
    [0.5, 1.5, 2.5, 3.5, 4.5, 5.5]
}

fn value(a: &[f64; 6], x: f64) -> f64 {
    a.iter().zip(exps()).map(|(c, e)| c * x.powf(e)).sum()
}

fn slope(a: &[f64; 6], x: f64) -> f64 {
    a.iter().zip(exps()).map(|(c, e)| c * e * x.powf(e - 1.0)).sum()
}

fn curvature(a: &[f64; 6], x: f64) -> f64 {
    a.iter().zip(exps()).map(|(c, e)| c * e * (e - 1.0) * x.powf(e - 2.0)).sum()
}

fn surface_matrix(xc: f64) -> Matrix6<f64> {
    let e = exps();
    let mut m = Matrix6::zeros();
    m[(0, 0)] = 1.0;
    for j in 0..6 {
        m[(1, j)] = 1.0;
        m[(2, j)] = e[j];
        m[(3, j)] = xc.powf(e[j]);
        m[(4, j)] = e[j] * xc.powf(e[j] - 1.0);
        m[(5, j)] = e[j] * (e[j] - 1.0) * xc.powf(e[j] - 2.0);
    }
    m
}

fn condition(m: &Matrix6<f64>) -> f64 {
    let sv = m.singular_values();
    sv.max() / sv.min()
}

/// Larger of the two surface-system condition numbers.
pub fn parsec_condition(v: &ParsecVars) -> f64 {
    condition(&surface_matrix(v.x_upper)).max(condition(&surface_matrix(v.x_lower)))
}

fn solve_surface(a1: f64, y_end: f64, slope_end: f64, xc: f64, yc: f64, yxx: f64) -> Result<[f64; 6], ParamError> {
    let m = surface_matrix(xc);
    let cond = condition(&m);
    if !cond.is_finite() || cond > PARSEC_COND_LIMIT {
        return Err(ParamError::SingularSystem(cond));
    }
    if cond > PARSEC_COND_WARN {
        log::warn!("PARSEC system is ill-conditioned (condition number {cond:.3e}, crest x = {xc})");
    }
    let rhs = Vector6::new(a1, y_end, slope_end, yc, 0.0, yxx);
    let sol = m.lu().solve(&rhs).ok_or(ParamError::SingularSystem(cond))?;
    Ok([sol[0], sol[1], sol[2], sol[3], sol[4], sol[5]])
}

/// Solve the two 6x6 linear systems for the polynomial coefficients.
pub fn parsec_solve(v: &ParsecVars) -> Result<ParsecCoefficients, ParamError> {
    if v.x_upper <= 0.0 || v.x_upper >= 1.0 || v.x_lower <= 0.0 || v.x_lower >= 1.0 {
        return Err(ParamError::SingularSystem(f64::INFINITY));
    }
    let upper = solve_surface(
        (2.0 * v.r_le_upper.max(0.0)).sqrt(),
        v.y_te + 0.5 * v.dy_te,
        (v.alpha_te - 0.5 * v.beta_te).tan(),
        v.x_upper,
        v.y_upper,
        v.yxx_upper,
    )?;
    let lower = solve_surface(
        -(2.0 * v.r_le_lower.max(0.0)).sqrt(),
        v.y_te - 0.5 * v.dy_te,
        (v.alpha_te + 0.5 * v.beta_te).tan(),
        v.x_lower,
        v.y_lower,
        v.yxx_lower,
    )?;
    Ok(ParsecCoefficients { upper, lower })
}

pub fn parsec_eval(coeffs: &ParsecCoefficients, grid: &[f64]) -> AirfoilSection {
    AirfoilSection::new(
        grid.to_vec(),
        grid.iter().map(|&x| value(&coeffs.upper, x)).collect(),
        grid.iter().map(|&x| value(&coeffs.lower, x)).collect(),
    )
}

/// Extremum of one polynomial surface: dense scan, then Newton on `Y' = 0`.
fn crest(a: &[f64; 6], upper: bool) -> (f64, f64, f64) {
    let sgn = if upper { 1.0 } else { -1.0 };
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 1..2000 {
        let x = k as f64 / 2000.0;
        let v = sgn * value(a, x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let mut x = best.0;
    for _ in 0..50 {
        let d = curvature(a, x);
        if d == 0.0 {
            break;
        }
        let step = slope(a, x) / d;
        let nx = (x - step).clamp(1e-6, 1.0 - 1e-6);
        if (nx - x).abs() < 1e-15 {
            x = nx;
            break;
        }
        x = nx;
    }
    (x, value(a, x), curvature(a, x))
}

/// Recover the twelve variables from polynomial coefficients.
pub fn parsec_features(c: &ParsecCoefficients) -> ParsecVars {
    let (xu, yu, kxu) = crest(&c.upper, true);
    let (xl, yl, kxl) = crest(&c.lower, false);
    let (te_u, te_l) = (value(&c.upper, 1.0), value(&c.lower, 1.0));
    let (su, sl) = (slope(&c.upper, 1.0).atan(), slope(&c.lower, 1.0).atan());
    ParsecVars {
        r_le_upper: 0.5 * c.upper[0] * c.upper[0],
        r_le_lower: 0.5 * c.lower[0] * c.lower[0],
        x_upper: xu,
        y_upper: yu,
        yxx_upper: kxu,
        x_lower: xl,
        y_lower: yl,
        yxx_lower: kxl,
        y_te: 0.5 * (te_u + te_l),
        dy_te: te_u - te_l,
        alpha_te: 0.5 * (su + sl),
        beta_te: sl - su,
    }
}

/// Crest of a sampled surface from a parabola through the extreme point and
/// its neighbours.
fn sampled_crest(x: &[f64], y: &[f64], upper: bool) -> (f64, f64, f64) {
    let n = x.len();
    let sgn = if upper { 1.0 } else { -1.0 };
    let k = (1..n - 1)
        .max_by(|&a, &b| (sgn * y[a]).total_cmp(&(sgn * y[b])))
        .unwrap_or(1)
        .clamp(1, n - 2);
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c2 = (d12 - d01) / (x2 - x0);
    let c1 = d01 - c2 * (x0 + x1);
    let c0 = y0 - c1 * x0 - c2 * x0 * x0;
    if c2 == 0.0 {
        return (x1, y1, 0.0);
    }
    let xs = (-c1 / (2.0 * c2)).clamp(x0, x2);
    (xs, c0 + c1 * xs + c2 * xs * xs, 2.0 * c2)
}

/// Estimate the PARSEC variables of a sampled section.
pub fn section_parsec_vars(s: &AirfoilSection) -> ParsecVars {
    let n = s.x.len();
    let sq = s.x[1].sqrt();
    let au = s.y_upper[1] / sq;
    let al = s.y_lower[1] / sq;
    let (xu, yu, kxu) = sampled_crest(&s.x, &s.y_upper, true);
    let (xl, yl, kxl) = sampled_crest(&s.x, &s.y_lower, false);
    let dx = s.x[n - 1] - s.x[n - 2];
    let su = ((s.y_upper[n - 1] - s.y_upper[n - 2]) / dx).atan();
    let sl = ((s.y_lower[n - 1] - s.y_lower[n - 2]) / dx).atan();
    ParsecVars {
        r_le_upper: 0.5 * au * au,
        r_le_lower: 0.5 * al * al,
        x_upper: xu,
        y_upper: yu,
        yxx_upper: kxu,
        x_lower: xl,
        y_lower: yl,
        yxx_lower: kxl,
        y_te: 0.5 * (s.y_upper[n - 1] + s.y_lower[n - 1]),
        dy_te: s.y_upper[n - 1] - s.y_lower[n - 1],
        alpha_te: 0.5 * (su + sl),
        beta_te: sl - su,
    }
}

#[derive(Debug, Clone)]
pub struct Parsec {
    bounds: Vec<(f64, f64)>,
    grid: Vec<f64>,
}

impl Default for Parsec {
    fn default() -> Self {
        let bounds = vec![
            (0.002, 0.04),
            (0.002, 0.04),
            (0.2, 0.6),
            (0.02, 0.15),
            (-1.5, -0.05),
            (0.15, 0.6),
            (-0.12, 0.02),
            (-0.5, 1.5),
            (-0.02, 0.02),
            (0.0, 0.01),
            (-0.3, 0.3),
            (0.02, 0.5),
        ];
        Self { bounds, grid: cosine_grid() }
    }
}

impl Parsec {
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }
}

impl Parameterization for Parsec {
    fn name(&self) -> String {
        "PARSEC".into()
    }

    fn n_dv(&self) -> usize {
        12
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError> {
        self.check_len(dv)?;
        let c = parsec_solve(&ParsecVars::from_slice(&dv.values))?;
        Ok(parsec_eval(&c, &self.grid))
    }

    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        let v = section_parsec_vars(section);
        parsec_solve(&v)?;
        Ok(v.to_array().to_vec().into())
    }
}
