//! Full-batch Adam training with the stepwise learning-rate schedule,
//! the sequential hyperparameter grid search, and latent diagnostics.

mod diagnostics;
mod grid;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostics::{
    correlation_diagnostics, correlation_of, count_active_latents, diagnostics, ActiveLatents, CorrelationReport,
    DiagnosticsReport, ACTIVE_THRESHOLD, SWEEP_POINTS,
};
pub use grid::{grid_search, GridCell, GridResult, GridSearchReport, GridSpec};

use crate::geom::{AirfoilDataset, ThicknessCamber};
use crate::io::write_csv_rows;
use crate::vae::{
    latent_box_or_range, loss_and_grad, Checkpoint, LatentBox, LossConfig, LossRecord, Model, ModelConfig, TrainingMeta,
    VaeError,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss diverged at epoch {epoch}")]
    DivergedLoss { epoch: usize, last_good: Box<Checkpoint> },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] VaeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub initial_lr: f64,
    pub decay: f64,
    pub decay_period: usize,
    pub beta: f64,
    pub lambda: f64,
    pub latent_sampling: bool,
    /// Box samples per epoch for the sampling term; 0 = training-set size.
    pub n_random: usize,
    pub seed: u64,
    pub full_batch: bool,
    /// Log progress every this many epochs (0 disables).
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25_000,
            initial_lr: 1e-2,
            decay: 0.7,
            decay_period: 2500,
            beta: 2.5e-8,
            lambda: 1e-5,
            latent_sampling: true,
            n_random: 0,
            seed: 0,
            full_batch: true,
            log_every: 0,
        }
    }
}

impl TrainConfig {
    /// Laptop-scale preset: 2,000 epochs, the decay schedule compressed by
    /// the same factor, and a stronger alignment weight so the physical
    /// latents lock on within the shorter budget.
    pub fn desk() -> Self {
        Self { epochs: 2000, decay_period: 200, lambda: 1e-3, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.initial_lr > 0.0) || !self.initial_lr.is_finite() {
            return bad("initial_lr must be positive and finite");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad("decay must lie in (0, 1]");
        }
        if self.decay_period == 0 {
            return bad("decay_period must be positive");
        }
        if !(self.beta >= 0.0) || !(self.lambda >= 0.0) {
            return bad("beta and lambda must be non-negative");
        }
        if !self.full_batch {
            return bad("only full-batch training is supported");
        }
        Ok(())
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig { beta: self.beta, lambda: self.lambda, latent_sampling: self.latent_sampling, n_random: self.n_random }
    }

    /// `initial_lr * decay^floor(epoch / decay_period)`.
    pub fn lr(&self, epoch: usize) -> f64 {
        self.initial_lr * self.decay.powi((epoch / self.decay_period) as i32)
    }
}

/// Adam with the usual defaults.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

/// Seed of the weight initialisation, derived from the run seed.
fn init_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_1417
}

/// Latent box of the training means under the current weights.
pub fn training_latent_box(model: &Model, samples: &[ThicknessCamber]) -> Result<LatentBox, VaeError> {
    let latents = samples.iter().map(|tc| Ok(model.encode(tc)?.means())).collect::<Result<Vec<_>, VaeError>>()?;
    Ok(latent_box_or_range(&latents))
}

fn snapshot(model: &Model, samples: &[ThicknessCamber], cfg: &TrainConfig, epoch: usize, history: &[LossRecord]) -> Result<Checkpoint, VaeError> {
    Ok(Checkpoint {
        model: model.clone(),
        latent_box: training_latent_box(model, samples)?,
        meta: TrainingMeta {
            epoch,
            seed: cfg.seed,
            beta: cfg.beta,
            lambda: cfg.lambda,
            latent_sampling: cfg.latent_sampling,
            history: history.to_vec(),
        },
    })
}

/// Train a fresh model on the dataset's training split.
pub fn train(dataset: &AirfoilDataset, model_config: &ModelConfig, cfg: &TrainConfig) -> Result<Checkpoint, TrainError> {
    let samples: Vec<ThicknessCamber> = dataset.train_samples().into_iter().cloned().collect();
    let model = Model::new(model_config.clone(), init_seed(cfg.seed))?.with_normalizer(dataset.normalizer.clone());
    train_model(model, &samples, cfg)
}

/// Train an initialised model (with normalizer) on `samples`.
pub fn train_model(mut model: Model, samples: &[ThicknessCamber], cfg: &TrainConfig) -> Result<Checkpoint, TrainError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(VaeError::EmptyBatch.into());
    }
    let loss_cfg = cfg.loss_config();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params.len());
    let mut history: Vec<LossRecord> = Vec::with_capacity(cfg.epochs);
    let mut good = (model.params.clone(), adam.clone());
    let mut lr_scale = 1.0;
    let mut retried = false;
    let mut epoch = 0;
    while epoch < cfg.epochs {
        let lr = cfg.lr(epoch) * lr_scale;
        let out = loss_and_grad(&model, samples, &loss_cfg, &mut rng, None)?;
        let b = out.breakdown;
        let finite = b.total.is_finite() && out.grad.iter().all(|g| g.is_finite());
        if !finite {
            if retried {
                model.params = good.0;
                let last_good = snapshot(&model, samples, cfg, epoch, &history)?;
                return Err(TrainError::DivergedLoss { epoch, last_good: Box::new(last_good) });
            }
            log::warn!("non-finite loss at epoch {epoch}; halving the learning rate and retrying");
            retried = true;
            lr_scale *= 0.5;
            model.params = good.0.clone();
            adam = good.1.clone();
            continue;
        }
        good = (model.params.clone(), adam.clone());
        history.push(LossRecord {
            epoch,
            recon: b.recon_mse,
            kld: b.kld,
            phys_train: b.mse_phys_train,
            phys_random: b.mse_phys_random,
            total: b.total,
            lr,
        });
        if cfg.log_every > 0 && epoch % cfg.log_every == 0 {
            log::info!(
                "epoch {epoch}: total {:.4e} recon {:.4e} kld {:.3} phys {:.3e}/{:.3e}",
                b.total,
                b.recon_mse,
                b.kld,
                b.mse_phys_train,
                b.mse_phys_random
            );
        }
        adam.step(&mut model.params, &out.grad, lr);
        epoch += 1;
    }
    if !model.params.iter().all(|p| p.is_finite()) {
        model.params = good.0;
        let last_good = snapshot(&model, samples, cfg, epoch, &history)?;
        return Err(TrainError::DivergedLoss { epoch, last_good: Box::new(last_good) });
    }
    Ok(snapshot(&model, samples, cfg, epoch, &history)?)
}

/// Per-epoch loss history as CSV.
pub fn write_loss_csv(path: &Path, history: &[LossRecord]) -> std::io::Result<()> {
    write_csv_rows(path, history)
}
