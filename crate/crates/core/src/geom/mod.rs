//! Airfoil geometry preparation: parsing, canonical resampling,
//! thickness/camber decomposition, feature extraction and datasets.

mod dataset;
mod features;
pub mod naca;
mod parse;
mod pchip;
mod resample;
pub mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    build_dataset, AirfoilDataset, BuildReport, FilterConfig, Rejection, DATASET_MAGIC,
    DATASET_VERSION,
};
pub use features::{extract_features, fit_normalizer, Feature, FeatureNormalizer, GeometricFeatures, R_LE_FLOOR};
pub use parse::{parse_coordinate_file, write_selig, RawAirfoil};
pub use pchip::Pchip;
pub use resample::{resample_to_section, resample_with_residual};

/// Number of intervals of the canonical cosine grid.
pub const GRID_INTERVALS: usize = 100;
/// Number of points of the canonical cosine grid.
pub const GRID_LEN: usize = GRID_INTERVALS + 1;

/// Slack on the minimum thickness when deciding whether a section crosses
/// itself.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("malformed coordinate file: {0}")]
    MalformedFile(String),
    #[error("cannot classify coordinate file layout: {0}")]
    AmbiguousFormat(String),
    #[error("leading and trailing edge coincide")]
    DegenerateChord,
    #[error("{0} surface is not single-valued in x")]
    NonFunctionSurface(&'static str),
    #[error("feature {0} has zero range over the sample")]
    DegenerateFeature(&'static str),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `x_i = (1 - cos(pi i / n)) / 2` for `i = 0..=n`.
pub fn cosine_grid_n(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| (1.0 - (std::f64::consts::PI * i as f64 / intervals as f64).cos()) / 2.0)
        .collect()
}

/// The canonical 101-point cosine grid.
pub fn cosine_grid() -> Vec<f64> {
    cosine_grid_n(GRID_INTERVALS)
}

/// Upper and lower surfaces sampled on a shared x-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirfoilSection {
    pub x: Vec<f64>,
    pub y_upper: Vec<f64>,
    pub y_lower: Vec<f64>,
}

impl AirfoilSection {
    pub fn new(x: Vec<f64>, y_upper: Vec<f64>, y_lower: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), y_upper.len());
        debug_assert_eq!(x.len(), y_lower.len());
        Self { x, y_upper, y_lower }
    }

    /// Flat plate on the canonical grid.
    pub fn flat() -> Self {
        let x = cosine_grid();
        let n = x.len();
        Self::new(x, vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Smallest vertical gap between the surfaces.
    pub fn min_thickness(&self) -> f64 {
        self.y_upper
            .iter()
            .zip(&self.y_lower)
            .map(|(u, l)| u - l)
            .fold(f64::INFINITY, f64::min)
    }

    /// Non-self-intersecting within `tol` (min thickness >= -tol).
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.y_upper.iter().chain(&self.y_lower).all(|v| v.is_finite())
            && self.min_thickness() >= -tol
    }

    /// Mean squared error over both surfaces.
    pub fn mse(&self, other: &AirfoilSection) -> f64 {
        let n = 2 * self.len();
        let su: f64 = self.y_upper.iter().zip(&other.y_upper).map(|(a, b)| (a - b).powi(2)).sum();
        let sl: f64 = self.y_lower.iter().zip(&other.y_lower).map(|(a, b)| (a - b).powi(2)).sum();
        (su + sl) / n as f64
    }

    /// Selig-ordered point list: TE, upper surface to LE, lower surface to TE.
    pub fn selig_points(&self) -> Vec<(f64, f64)> {
        let n = self.len();
        let mut pts = Vec::with_capacity(2 * n - 1);
        for i in (0..n).rev() {
            pts.push((self.x[i], self.y_upper[i]));
        }
        for i in 1..n {
            pts.push((self.x[i], self.y_lower[i]));
        }
        pts
    }
}

/// Thickness and camber distributions on a shared x-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessCamber {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub c: Vec<f64>,
}

impl ThicknessCamber {
    pub fn new(x: Vec<f64>, t: Vec<f64>, c: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), t.len());
        debug_assert_eq!(x.len(), c.len());
        Self { x, t, c }
    }

    /// `y_upper = c + t/2`, `y_lower = c - t/2`.
    pub fn recompose(&self) -> AirfoilSection {
        let y_upper = self.t.iter().zip(&self.c).map(|(t, c)| c + 0.5 * t).collect();
        let y_lower = self.t.iter().zip(&self.c).map(|(t, c)| c - 0.5 * t).collect();
        AirfoilSection::new(self.x.clone(), y_upper, y_lower)
    }

    pub fn min_thickness(&self) -> f64 {
        self.t.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Restrict to a subset of grid indices (used for decimated models).
    pub fn decimate(&self, indices: &[usize]) -> Self {
        Self::new(
            indices.iter().map(|&i| self.x[i]).collect(),
            indices.iter().map(|&i| self.t[i]).collect(),
            indices.iter().map(|&i| self.c[i]).collect(),
        )
    }
}

/// `t = y_upper - y_lower`, `c = (y_upper + y_lower) / 2`.
pub fn decompose(section: &AirfoilSection) -> ThicknessCamber {
    let t = section.y_upper.iter().zip(&section.y_lower).map(|(u, l)| u - l).collect();
    let c = section
        .y_upper
        .iter()
        .zip(&section.y_lower)
        .map(|(u, l)| 0.5 * (u + l))
        .collect();
    ThicknessCamber::new(section.x.clone(), t, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_grid_anchor_points() {
        let x = cosine_grid();
        assert_eq!(x.len(), 101);
        assert_eq!(x[0], 0.0);
        assert!((x[50] - 0.5).abs() <= f64::EPSILON);
        assert_eq!(x[100], 1.0);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        for (i, xi) in x.iter().enumerate() {
            let expected = (1.0 - (std::f64::consts::PI * i as f64 / 100.0).cos()) / 2.0;
            assert_eq!(*xi, expected);
        }
    }

    #[test]
    fn symmetric_section_decomposes_to_zero_camber() {
        let x = cosine_grid();
        let n = x.len();
        let mut yu = vec![0.06; n];
        let mut yl = vec![-0.06; n];
        yu[0] = 0.0;
        yl[0] = 0.0;
        yu[n - 1] = 0.0;
        yl[n - 1] = 0.0;
        let tc = decompose(&AirfoilSection::new(x, yu, yl));
        for i in 1..n - 1 {
            assert_eq!(tc.t[i], 0.12);
            assert_eq!(tc.c[i], 0.0);
        }
    }

    #[test]
    fn coincident_surfaces_give_pure_camber() {
        let x = cosine_grid();
        let n = x.len();
        let tc = decompose(&AirfoilSection::new(x, vec![0.02; n], vec![0.02; n]));
        assert!(tc.t.iter().all(|&t| t == 0.0));
        assert!(tc.c.iter().all(|&c| c == 0.02));
    }

    #[test]
    fn recompose_inverts_decompose() {
        let x = cosine_grid();
        let yu: Vec<f64> = x.iter().map(|&x| 0.25 * x.sqrt() * (1.0 - x)).collect();
        let yl: Vec<f64> = x.iter().map(|&x| -0.125 * x.sqrt() * (1.0 - x)).collect();
        let s = AirfoilSection::new(x, yu, yl);
        let back = decompose(&s).recompose();
        for i in 0..s.len() {
            assert!((back.y_upper[i] - s.y_upper[i]).abs() <= 1e-17);
            assert!((back.y_lower[i] - s.y_lower[i]).abs() <= 1e-17);
        }
    }
}
