use serde::{Deserialize, Serialize};

use crate::geom::ThicknessCamber;
use crate::stats::{mean_lower_triangle_abs, pearson};
use crate::vae::{Checkpoint, LatentBox, LossRecord, Model, VaeError};

pub const ACTIVE_THRESHOLD: f64 = 1e-5;
pub const SWEEP_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveLatents {
    /// Mean over output ordinates of the standard deviation across a sweep
    /// of each latent dimension.
    pub stds: Vec<f64>,
    pub threshold: f64,
    pub count: usize,
}

/// Sweep each latent across its box with the others at the training mean
/// and count the dimensions that move the output.
pub fn count_active_latents(model: &Model, latent_box: &LatentBox, threshold: f64) -> Result<ActiveLatents, VaeError> {
    let d = model.latent_dim();
    let mut stds = Vec::with_capacity(d);
    for dim in 0..d {
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(SWEEP_POINTS);
        for k in 0..SWEEP_POINTS {
            let mut z = latent_box.mean.clone();
            let (lo, hi) = (latent_box.lo[dim], latent_box.hi[dim]);
            z[dim] = lo + (hi - lo) * k as f64 / (SWEEP_POINTS - 1) as f64;
            let s = model.decode_section(&z)?;
            outputs.push(s.y_upper.into_iter().chain(s.y_lower).collect());
        }
        let n_pts = outputs[0].len();
        let n = SWEEP_POINTS as f64;
        let mut acc = 0.0;
        for i in 0..n_pts {
            let mean = outputs.iter().map(|o| o[i]).sum::<f64>() / n;
            let var = outputs.iter().map(|o| (o[i] - mean).powi(2)).sum::<f64>() / n;
            acc += var.sqrt();
        }
        stds.push(acc / n_pts as f64);
    }
    let count = stds.iter().filter(|&&s| s > threshold).count();
    Ok(ActiveLatents { stds, threshold, count })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Latent indices included in the matrix (zero-variance ones dropped).
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
    /// Mean absolute coefficient over the strict lower triangle.
    pub c_bar: f64,
}

/// Pearson matrix between the columns of `samples` restricted to `dims`.
pub fn correlation_of(samples: &[Vec<f64>], dims: &[usize]) -> CorrelationReport {
    let cols: Vec<(usize, Vec<f64>)> = dims.iter().map(|&d| (d, samples.iter().map(|z| z[d]).collect())).collect();
    let kept: Vec<&(usize, Vec<f64>)> = cols
        .iter()
        .filter(|(d, c)| {
            let ok = pearson(c, c).is_some();
            if !ok {
                log::warn!("latent {d} has zero variance; excluded from the correlation matrix");
            }
            ok
        })
        .collect();
    let matrix: Vec<Vec<f64>> = kept
        .iter()
        .map(|(_, a)| kept.iter().map(|(_, b)| pearson(a, b).unwrap_or(0.0)).collect())
        .collect();
    let c_bar = mean_lower_triangle_abs(&matrix);
    CorrelationReport { dims: kept.iter().map(|(d, _)| *d).collect(), matrix, c_bar }
}

/// Correlation among the free-latent means of the given samples.
pub fn correlation_diagnostics(model: &Model, samples: &[&ThicknessCamber]) -> Result<CorrelationReport, VaeError> {
    let means = samples.iter().map(|tc| Ok(model.encode(tc)?.means())).collect::<Result<Vec<_>, VaeError>>()?;
    Ok(correlation_of(&means, &model.config.free_indices()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub history: Vec<LossRecord>,
    pub active: ActiveLatents,
    pub correlation: CorrelationReport,
}

pub fn diagnostics(ckpt: &Checkpoint, samples: &[&ThicknessCamber]) -> Result<DiagnosticsReport, VaeError> {
    Ok(DiagnosticsReport {
        history: ckpt.meta.history.clone(),
        active: count_active_latents(&ckpt.model, &ckpt.latent_box, ACTIVE_THRESHOLD)?,
        correlation: correlation_diagnostics(&ckpt.model, samples)?,
    })
}
