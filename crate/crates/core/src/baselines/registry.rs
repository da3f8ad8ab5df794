use serde::{Deserialize, Serialize};

use super::{derive_bounds, svd_fit, Bezier10, Cst, Parsec, SvdModel};
use crate::geom::AirfoilSection;
use crate::param::{ParamError, Parameterization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Cst,
    Parsec,
    Bezier,
    Svd,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [BaselineKind::Parsec, BaselineKind::Cst, BaselineKind::Svd, BaselineKind::Bezier];

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cst" => Some(Self::Cst),
            "parsec" => Some(Self::Parsec),
            "bezier" => Some(Self::Bezier),
            "svd" => Some(Self::Svd),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Cst => "cst",
            Self::Parsec => "parsec",
            Self::Bezier => "bezier",
            Self::Svd => "svd",
        }
    }

    /// Methods whose design-vector length is fixed.
    pub fn fixed_n_dv(self) -> Option<usize> {
        match self {
            Self::Parsec => Some(12),
            Self::Bezier => Some(10),
            Self::Cst | Self::Svd => None,
        }
    }
}

/// Build a baseline whose search box is derived from fits to `sections`.
/// SVD modes come from `svd` when given (truncated to `n_dv`), otherwise
/// they are fitted to `sections`.
pub fn build_baseline(
    kind: BaselineKind,
    n_dv: usize,
    sections: &[AirfoilSection],
    svd: Option<&SvdModel>,
) -> Result<Box<dyn Parameterization>, ParamError> {
    if let Some(fixed) = kind.fixed_n_dv() {
        if n_dv != fixed {
            return Err(ParamError::DimensionMismatch { expected: fixed, got: n_dv });
        }
    }
    if n_dv == 0 {
        return Err(ParamError::InvalidBounds("at least one design variable is required".into()));
    }
    Ok(match kind {
        BaselineKind::Cst => {
            let p = Cst::new(n_dv);
            let b = derive_bounds(&p, sections)?;
            Box::new(p.with_bounds(b))
        }
        BaselineKind::Parsec => {
            let p = Parsec::default();
            let b = derive_bounds(&p, sections)?;
            Box::new(p.with_bounds(b))
        }
        BaselineKind::Bezier => {
            let p = Bezier10::default();
            let b = derive_bounds(&p, sections)?;
            Box::new(p.with_bounds(b))
        }
        BaselineKind::Svd => {
            let mut m = match svd {
                Some(model) if model.n_modes() >= n_dv => model.truncated(n_dv),
                _ => svd_fit(sections, n_dv)?,
            };
            m.bounds = None;
            let b = derive_bounds(&m, sections)?;
            m.bounds = Some(b);
            Box::new(m)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{cosine_grid, naca::naca4_section};

    fn sections() -> Vec<AirfoilSection> {
        let g = cosine_grid();
        (0..40)
            .map(|i| {
                let f = i as f64 / 39.0;
                naca4_section(0.05 * ((7 * i) % 11) as f64 / 10.0, 0.25 + 0.3 * f, 0.06 + 0.1 * ((3 * i) % 13) as f64 / 12.0, &g)
            })
            .collect()
    }

    #[test]
    fn every_kind_builds_with_derived_bounds() {
        let data = sections();
        for kind in BaselineKind::ALL {
            let n = kind.fixed_n_dv().unwrap_or(4);
            let p = build_baseline(kind, n, &data, None).unwrap();
            assert_eq!(p.n_dv(), n);
            assert!(p.bounds().iter().all(|(lo, hi)| lo < hi));
            assert_eq!(BaselineKind::from_name(kind.name()), Some(kind));
        }
    }

    #[test]
    fn fixed_sizes_are_enforced() {
        let data = sections();
        assert!(matches!(
            build_baseline(BaselineKind::Parsec, 10, &data, None),
            Err(ParamError::DimensionMismatch { expected: 12, got: 10 })
        ));
    }
}
