use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::latent::LatentBox;
use super::loss::{loss_and_grad, LossConfig};
use super::model::Model;
use super::VaeError;
use crate::geom::ThicknessCamber;

/// Analytic versus central-difference gradient of the total loss.
#[derive(Debug, Clone)]
pub struct GradCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

impl GradCheck {
    /// `|a - n| / |n|` in the Euclidean norm.
    pub fn relative_error(&self) -> f64 {
        let diff: f64 = self.analytic.iter().zip(&self.numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = self.numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        if norm == 0.0 {
            diff
        } else {
            diff / norm
        }
    }

    /// Largest component error relative to the largest numeric component.
    pub fn max_component_error(&self) -> f64 {
        let scale = self.numeric.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        self.analytic.iter().zip(&self.numeric).map(|(a, n)| (a - n).abs()).fold(0.0, f64::max) / scale
    }
}

/// Compare gradients for the given loss weights. The noise stream is
/// re-seeded for every evaluation so all evaluations see the same draws.
pub fn gradient_check(
    model: &Model,
    batch: &[ThicknessCamber],
    cfg: &LossConfig,
    latent_box: &LatentBox,
    seed: u64,
    h: f64,
) -> Result<GradCheck, VaeError> {
    let eval = |m: &Model| -> Result<(f64, Vec<f64>), VaeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = loss_and_grad(m, batch, cfg, &mut rng, Some(latent_box))?;
        Ok((out.breakdown.total, out.grad))
    };
    let (_, analytic) = eval(model)?;
    let mut probe = model.clone();
    let mut numeric = Vec::with_capacity(analytic.len());
    for i in 0..model.params.len() {
        let orig = probe.params[i];
        probe.params[i] = orig + h;
        let (fp, _) = eval(&probe)?;
        probe.params[i] = orig - h;
        let (fm, _) = eval(&probe)?;
        probe.params[i] = orig;
        numeric.push((fp - fm) / (2.0 * h));
    }
    Ok(GradCheck { analytic, numeric })
}
