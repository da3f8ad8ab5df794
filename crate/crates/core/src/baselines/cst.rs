use nalgebra::{DMatrix, DVector};

use super::least_squares;
use crate::curves::bernstein;
use crate::geom::{cosine_grid, AirfoilSection};
use crate::param::{DesignVector, ParamError, Parameterization};

/// Class-shape transformation with a round nose and sharp trailing edge
/// (`N1 = 0.5`, `N2 = 1`). The first half of the design vector holds the
/// upper-surface weights, the second half the lower.
#[derive(Debug, Clone)]
pub struct Cst {
    n_dv: usize,
    bounds: Vec<(f64, f64)>,
    grid: Vec<f64>,
}

impl Cst {
    pub fn new(n_dv: usize) -> Self {
        assert!(n_dv >= 2 && n_dv % 2 == 0, "CST needs an even, positive design-variable count");
        let half = n_dv / 2;
        let mut bounds = vec![(-0.1, 0.6); half];
        bounds.extend(vec![(-0.6, 0.1); half]);
        Self { n_dv, bounds, grid: cosine_grid() }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    fn degree(&self) -> usize {
        self.n_dv / 2 - 1
    }

    /// Row of the linear map from weights to one surface.
    fn row(&self, x: f64) -> Vec<f64> {
        let n = self.degree();
        let class = x.sqrt() * (1.0 - x);
        (0..=n).map(|i| class * bernstein(i, n, x).expect("index within degree")).collect()
    }

    fn surface(&self, weights: &[f64]) -> Vec<f64> {
        self.grid.iter().map(|&x| self.row(x).iter().zip(weights).map(|(r, w)| r * w).sum()).collect()
    }
}

impl Parameterization for Cst {
    fn name(&self) -> String {
        format!("CST-{}", self.n_dv)
    }

    fn n_dv(&self) -> usize {
        self.n_dv
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError> {
        self.check_len(dv)?;
        let half = self.n_dv / 2;
        Ok(AirfoilSection::new(
            self.grid.clone(),
            self.surface(&dv.values[..half]),
            self.surface(&dv.values[half..]),
        ))
    }

    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        let half = self.n_dv / 2;
        let a = DMatrix::from_fn(section.x.len(), half, |i, j| self.row(section.x[i])[j]);
        let up = least_squares(&a, &DVector::from_column_slice(&section.y_upper))?;
        let lo = least_squares(&a, &DVector::from_column_slice(&section.y_lower))?;
        Ok(up.iter().chain(lo.iter()).copied().collect::<Vec<_>>().into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::naca::naca4_section;

    #[test]
    fn zero_weights_give_flat_plate() {
        let s = Cst::new(10).decode(&DesignVector::zeros(10)).unwrap();
        assert!(s.y_upper.iter().chain(&s.y_lower).all(|&v| v == 0.0));
    }

    #[test]
    fn equal_weights_collapse_to_class_function() {
        let cst = Cst::new(10);
        let mut dv = vec![0.0; 10];
        dv[..5].fill(0.2);
        let s = cst.decode(&dv.into()).unwrap();
        for (x, y) in s.x.iter().zip(&s.y_upper) {
            assert!((y - 0.2 * x.sqrt() * (1.0 - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn naca0012_fit_error_is_small() {
        let grid = cosine_grid();
        let target = naca4_section(0.0, 0.0, 0.12, &grid);
        let cst = Cst::new(10);
        let s = cst.decode(&cst.fit(&target).unwrap()).unwrap();
        let err = s
            .y_upper
            .iter()
            .zip(&target.y_upper)
            .chain(s.y_lower.iter().zip(&target.y_lower))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-4, "max error {err}");
    }

    #[test]
    fn passes_through_nose_and_tail() {
        let s = Cst::new(8).decode(&vec![0.3, -0.2, 0.5, 0.1, -0.1, -0.3, 0.2, 0.0].into()).unwrap();
        assert_eq!((s.y_upper[0], s.y_lower[0]), (0.0, 0.0));
        assert_eq!((s.y_upper[100], s.y_lower[100]), (0.0, 0.0));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(
            Cst::new(10).decode(&DesignVector::zeros(9)),
            Err(ParamError::DimensionMismatch { expected: 10, got: 9 })
        ));
    }
}
