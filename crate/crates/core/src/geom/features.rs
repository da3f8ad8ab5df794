use serde::{Deserialize, Serialize};

use super::{GeomError, ThicknessCamber};

/// Lower clamp applied to the leading-edge radius before taking its log.
pub const R_LE_FLOOR: f64 = 1e-6;

/// The four physical features, in the canonical order used throughout the
/// crate: camber-branch features first, then thickness-branch features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    MaxCamber,
    TeAngle,
    MaxThickness,
    LeRadius,
}

impl Feature {
    pub const ALL: [Feature; 4] =
        [Feature::MaxCamber, Feature::TeAngle, Feature::MaxThickness, Feature::LeRadius];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::MaxCamber => "m_max",
            Feature::TeAngle => "gamma_te",
            Feature::MaxThickness => "t_max",
            Feature::LeRadius => "r_le",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "m_max" | "m" => Some(Feature::MaxCamber),
            "gamma_te" | "gamma" => Some(Feature::TeAngle),
            "t_max" | "t" => Some(Feature::MaxThickness),
            "r_le" | "r" => Some(Feature::LeRadius),
            _ => None,
        }
    }
}

/// Geometric features of a section. `normalized` holds the `[0, 1]` images
/// once a [`FeatureNormalizer`] has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures {
    pub m_max: f64,
    pub gamma_te: f64,
    pub t_max: f64,
    pub r_le: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<[f64; 4]>,
}

impl GeometricFeatures {
    pub fn new(m_max: f64, gamma_te: f64, t_max: f64, r_le: f64) -> Self {
        Self { m_max, gamma_te, t_max, r_le, normalized: None }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m_max, self.gamma_te, self.t_max, self.r_le]
    }

    pub fn get(&self, f: Feature) -> f64 {
        self.as_array()[f.index()]
    }
}

/// Features of a distribution on the cosine grid.
///
/// `gamma_te` uses a two-interval backward difference of the camber line and
/// `r_le` the square-root nose model `h = a sqrt(x)` at the first interior
/// station, `r = h^2 / (2x)` with `h = t/2`.
pub fn extract_features(tc: &ThicknessCamber) -> GeometricFeatures {
    let n = tc.x.len();
    let t_max = tc.t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m_max = tc.c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = (tc.c[n - 1] - tc.c[n - 3]) / (tc.x[n - 1] - tc.x[n - 3]);
    let gamma_te = -slope.atan();
    let h = tc.t[1] / 2.0;
    let r_le = h * h / (2.0 * tc.x[1]);
    GeometricFeatures::new(m_max, gamma_te, t_max, r_le)
}

/// Per-feature min-max scaling fitted on a training set; the LE radius is
/// scaled in `log10` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNormalizer {
    /// `(min, max)` per feature in canonical order; `LeRadius` bounds are
    /// stored in log10 units.
    pub bounds: [(f64, f64); 4],
    pub log_r_le: bool,
}

impl FeatureNormalizer {
    fn transform(&self, f: Feature, value: f64) -> f64 {
        if f == Feature::LeRadius && self.log_r_le {
            value.max(R_LE_FLOOR).log10()
        } else {
            value
        }
    }

    pub fn normalize_value(&self, f: Feature, value: f64) -> f64 {
        let (lo, hi) = self.bounds[f.index()];
        (self.transform(f, value) - lo) / (hi - lo)
    }

    /// Derivative of [`normalize_value`](Self::normalize_value) with respect
    /// to the raw value.
    pub fn normalize_derivative(&self, f: Feature, value: f64) -> f64 {
        let (lo, hi) = self.bounds[f.index()];
        if f == Feature::LeRadius && self.log_r_le {
            if value <= R_LE_FLOOR {
                0.0
            } else {
                1.0 / (value * std::f64::consts::LN_10 * (hi - lo))
            }
        } else {
            1.0 / (hi - lo)
        }
    }

    pub fn denormalize_value(&self, f: Feature, normalized: f64) -> f64 {
        let (lo, hi) = self.bounds[f.index()];
        let v = lo + normalized * (hi - lo);
        if f == Feature::LeRadius && self.log_r_le {
            10f64.powf(v)
        } else {
            v
        }
    }

    pub fn normalize(&self, feats: &GeometricFeatures) -> [f64; 4] {
        let raw = feats.as_array();
        Feature::ALL.map(|f| self.normalize_value(f, raw[f.index()]))
    }

    pub fn denormalize(&self, normalized: [f64; 4]) -> GeometricFeatures {
        GeometricFeatures::from_array(Feature::ALL.map(|f| self.denormalize_value(f, normalized[f.index()])))
    }

    /// Copy of `feats` with the `normalized` field filled in.
    pub fn annotate(&self, feats: &GeometricFeatures) -> GeometricFeatures {
        GeometricFeatures { normalized: Some(self.normalize(feats)), ..*feats }
    }
}

/// Fit min-max bounds per feature (log10 for the LE radius).
pub fn fit_normalizer(features: &[GeometricFeatures]) -> Result<FeatureNormalizer, GeomError> {
    let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 4];
    for feats in features {
        for f in Feature::ALL {
            let mut v = feats.get(f);
            if f == Feature::LeRadius {
                v = v.max(R_LE_FLOOR).log10();
            }
            let b = &mut bounds[f.index()];
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    for f in Feature::ALL {
        let (lo, hi) = bounds[f.index()];
        if !(hi > lo) {
            return Err(GeomError::DegenerateFeature(f.name()));
        }
    }
    Ok(FeatureNormalizer { bounds, log_r_le: true })
}
