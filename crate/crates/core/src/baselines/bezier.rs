use nalgebra::{DMatrix, DVector};

use super::least_squares;
use crate::curves::bernstein;
use crate::geom::{cosine_grid, AirfoilSection};
use crate::param::{DesignVector, ParamError, Parameterization};

/// Abscissae of the free control points of each surface.
pub const BEZIER_X: [f64; 5] = [0.0, 0.15, 0.4, 0.7, 1.0];
const DEGREE: usize = 6;

/// Degree-6 Bézier per surface: pinned `(0,0)` and `(1,0)` ends plus five
/// free ordinates at fixed abscissae. Design vector: five upper then five
/// lower ordinates.
#[derive(Debug, Clone)]
pub struct Bezier10 {
    bounds: Vec<(f64, f64)>,
    grid: Vec<f64>,
    /// Bernstein weights of all seven control points at each grid point,
    /// found once by inverting the (ordinate-independent) x(u).
    weights: Vec<[f64; DEGREE + 1]>,
}

fn control_x() -> [f64; DEGREE + 1] {
    let mut cx = [0.0; DEGREE + 1];
    cx[1..=5].copy_from_slice(&BEZIER_X);
    cx[DEGREE] = 1.0;
    cx
}

fn bernstein_row(u: f64) -> [f64; DEGREE + 1] {
    let mut b = [0.0; DEGREE + 1];
    for (i, v) in b.iter_mut().enumerate() {
        *v = bernstein(i, DEGREE, u).expect("index within degree");
    }
    b
}

fn x_of_u(u: f64, cx: &[f64; DEGREE + 1]) -> f64 {
    bernstein_row(u).iter().zip(cx).map(|(b, x)| b * x).sum()
}

impl Default for Bezier10 {
    fn default() -> Self {
        let grid = cosine_grid();
        let cx = control_x();
        let weights = grid
            .iter()
            .map(|&xg| {
                // x(u) is strictly increasing on (0,1) for non-decreasing
                // control abscissae with distinct ends
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if x_of_u(mid, &cx) < xg {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let u = if xg <= 0.0 { 0.0 } else if xg >= 1.0 { 1.0 } else { 0.5 * (lo + hi) };
                bernstein_row(u)
            })
            .collect();
        let bounds = vec![
            (0.0, 0.1),
            (0.0, 0.2),
            (0.0, 0.2),
            (-0.05, 0.15),
            (-0.05, 0.1),
            (-0.1, 0.0),
            (-0.2, 0.05),
            (-0.2, 0.1),
            (-0.15, 0.1),
            (-0.1, 0.1),
        ];
        Self { bounds, grid, weights }
    }
}

impl Bezier10 {
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    fn surface(&self, free: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|w| (0..5).map(|j| w[j + 1] * free[j]).sum()).collect()
    }
}

impl Parameterization for Bezier10 {
    fn name(&self) -> String {
        "Bezier-10".into()
    }

    fn n_dv(&self) -> usize {
        10
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError> {
        self.check_len(dv)?;
        Ok(AirfoilSection::new(self.grid.clone(), self.surface(&dv.values[..5]), self.surface(&dv.values[5..])))
    }

    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        let a = DMatrix::from_fn(self.grid.len(), 5, |i, j| self.weights[i][j + 1]);
        let up = least_squares(&a, &DVector::from_column_slice(&section.y_upper))?;
        let lo = least_squares(&a, &DVector::from_column_slice(&section.y_lower))?;
        Ok(up.iter().chain(lo.iter()).copied().collect::<Vec<_>>().into())
    }
}
