use serde::{Deserialize, Serialize};

use super::{train, TrainConfig};
use crate::geom::AirfoilDataset;
use crate::vae::{Activation, BranchConfig, LossBreakdown, ModelConfig};

/// Hyperparameter values swept by [`grid_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n_filter: Vec<usize>,
    pub n_kernel: Vec<usize>,
    /// Total latent size of the model, split evenly between the branches.
    pub n_latent: Vec<usize>,
    pub activation: Vec<Activation>,
    pub betas: Vec<f64>,
    /// Epoch budget of every cell.
    pub epochs: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_filter: vec![32, 64, 128],
            n_kernel: vec![3, 7],
            n_latent: vec![6, 12],
            activation: vec![Activation::Gelu, Activation::Relu, Activation::LeakyRelu],
            betas: (0..11).map(|i| 10f64.powf(-9.0 + 0.2 * i as f64)).collect(),
            epochs: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub stage: u8,
    pub n_filter: usize,
    pub n_kernel: usize,
    pub n_latent: usize,
    pub activation: Activation,
    pub beta: f64,
}

impl GridCell {
    pub fn model_config(&self, base: &ModelConfig) -> ModelConfig {
        let branch = BranchConfig {
            n_filter: self.n_filter,
            n_kernel: self.n_kernel,
            n_latent_total: self.n_latent / 2,
            activation: self.activation,
            ..base.camber.clone()
        };
        ModelConfig { camber: branch.clone(), thickness: branch, ..base.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cell: GridCell,
    pub loss: Option<LossBreakdown>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    /// Successful cells, lowest final training loss first.
    pub ranked: Vec<GridResult>,
    pub failures: Vec<GridResult>,
}

fn run_cell(dataset: &AirfoilDataset, base: &ModelConfig, cfg: &TrainConfig, cell: GridCell) -> GridResult {
    let tc = TrainConfig { beta: cell.beta, ..cfg.clone() };
    match train(dataset, &cell.model_config(base), &tc) {
        Ok(ck) => {
            let last = ck.meta.history.last().copied();
            let loss = last.map(|r| LossBreakdown {
                recon_mse: r.recon,
                kld: r.kld,
                mse_phys_train: r.phys_train,
                mse_phys_random: r.phys_random,
                total: r.total,
                beta: tc.beta,
                lambda: tc.lambda,
            });
            GridResult { cell, loss, error: None }
        }
        Err(e) => {
            log::warn!("grid cell {cell:?} failed: {e}");
            GridResult { cell, loss: None, error: Some(e.to_string()) }
        }
    }
}

fn rank(results: Vec<GridResult>, report: &mut GridSearchReport) -> Vec<GridResult> {
    let (mut ok, bad): (Vec<_>, Vec<_>) = results.into_iter().partition(|r| r.loss.is_some());
    ok.sort_by(|a, b| a.loss.expect("ok").total.total_cmp(&b.loss.expect("ok").total));
    report.failures.extend(bad);
    ok
}

/// Two-stage sequential search: architecture with `beta = 0`, then `beta`
/// for the stage-one winner. Cells that fail are logged and skipped.
pub fn grid_search(dataset: &AirfoilDataset, base: &ModelConfig, cfg: &TrainConfig, spec: &GridSpec) -> GridSearchReport {
    let cell_cfg = TrainConfig { epochs: spec.epochs, ..cfg.clone() };
    let mut report = GridSearchReport::default();
    let mut stage1 = Vec::new();
    for &n_filter in &spec.n_filter {
        for &n_kernel in &spec.n_kernel {
            for &n_latent in &spec.n_latent {
                for &activation in &spec.activation {
                    let cell = GridCell { stage: 1, n_filter, n_kernel, n_latent, activation, beta: 0.0 };
                    stage1.push(run_cell(dataset, base, &cell_cfg, cell));
                }
            }
        }
    }
    let stage1 = rank(stage1, &mut report);
    let Some(best) = stage1.first().map(|r| r.cell) else {
        return report;
    };
    let stage2: Vec<GridResult> = spec
        .betas
        .iter()
        .map(|&beta| run_cell(dataset, base, &cell_cfg, GridCell { stage: 2, beta, ..best }))
        .collect();
    let stage2 = rank(stage2, &mut report);
    report.ranked = stage1.into_iter().chain(stage2).collect();
    report
}
