use rand::Rng;
use serde::{Deserialize, Serialize};

use super::VaeError;
use crate::stats::percentile_sorted;

/// Fewest latent vectors accepted by [`update_latent_box`].
pub const MIN_BOX_SAMPLES: usize = 100;
const LO_PCT: f64 = 0.3;
const HI_PCT: f64 = 99.7;

/// Per-dimension sampling box of the latent space, plus the training mean
/// used as the "held constant" value in sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub mean: Vec<f64>,
}

fn columns(latents: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = latents[0].len();
    (0..d)
        .map(|j| {
            let mut col: Vec<f64> = latents.iter().map(|z| z[j]).collect();
            col.sort_by(|a, b| a.total_cmp(b));
            col
        })
        .collect()
}

fn means(latents: &[Vec<f64>]) -> Vec<f64> {
    let n = latents.len() as f64;
    let mut m = vec![0.0; latents[0].len()];
    for z in latents {
        for (a, b) in m.iter_mut().zip(z) {
            *a += b / n;
        }
    }
    m
}

/// 0.3 / 99.7 percentile box of training latents.
pub fn update_latent_box(latents: &[Vec<f64>]) -> Result<LatentBox, VaeError> {
    if latents.len() < MIN_BOX_SAMPLES {
        return Err(VaeError::TooFewSamples { need: MIN_BOX_SAMPLES, got: latents.len() });
    }
    let cols = columns(latents);
    Ok(LatentBox {
        lo: cols.iter().map(|c| percentile_sorted(c, LO_PCT)).collect(),
        hi: cols.iter().map(|c| percentile_sorted(c, HI_PCT)).collect(),
        mean: means(latents),
    })
}

/// Percentile box when enough samples exist, otherwise the min/max box.
pub fn latent_box_or_range(latents: &[Vec<f64>]) -> LatentBox {
    update_latent_box(latents).unwrap_or_else(|_| {
        let cols = columns(latents);
        LatentBox {
            lo: cols.iter().map(|c| c[0]).collect(),
            hi: cols.iter().map(|c| c[c.len() - 1]).collect(),
            mean: means(latents),
        }
    })
}

impl LatentBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lo.iter().copied().zip(self.hi.iter().copied()).collect()
    }

    /// Uniform sample; degenerate dimensions return their single value.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
            .collect()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}
