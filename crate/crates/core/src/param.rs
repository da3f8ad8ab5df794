//! The common interface shared by every shape parameterization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::CurveError;
use crate::geom::{AirfoilSection, GeomError};

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("design vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear system is singular (condition number {0:.3e})")]
    SingularSystem(f64),
    #[error("requested {requested} modes but the data has rank {rank}")]
    RankDeficient { requested: usize, rank: usize },
    #[error("fitting failed on {failed} of {total} samples")]
    FitFailure { failed: usize, total: usize },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("fitting is not supported by {0}")]
    FitUnsupported(String),
    #[error("generator: {0}")]
    Model(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    pub values: Vec<f64>,
}

impl DesignVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for DesignVector {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// A mapping from a bounded design vector to an airfoil section on the
/// canonical grid.
pub trait Parameterization: Send + Sync {
    fn name(&self) -> String;

    fn n_dv(&self) -> usize;

    /// Per-variable `(lo, hi)` search box.
    fn bounds(&self) -> Vec<(f64, f64)>;

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError>;

    /// Best design vector for a given section.
    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        let _ = section;
        Err(ParamError::FitUnsupported(self.name()))
    }

    fn check_len(&self, dv: &DesignVector) -> Result<(), ParamError> {
        if dv.len() != self.n_dv() {
            return Err(ParamError::DimensionMismatch { expected: self.n_dv(), got: dv.len() });
        }
        Ok(())
    }
}

/// Bounds must be finite with `lo < hi`.
pub fn validate_bounds(bounds: &[(f64, f64)]) -> Result<(), ParamError> {
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(ParamError::InvalidBounds(format!("variable {i}: [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Map a unit-cube point into a box.
pub fn scale_to_bounds(unit: &[f64], bounds: &[(f64, f64)]) -> DesignVector {
    unit.iter().zip(bounds).map(|(u, (lo, hi))| lo + u * (hi - lo)).collect::<Vec<_>>().into()
}
