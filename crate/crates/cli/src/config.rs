//! Run configuration: one TOML file with a section per stage. Unknown keys
//! are rejected, and every command writes the resolved configuration next
//! to its outputs.

use std::path::{Path, PathBuf};

use airgen::aso::{trial_seed, GaConfig, LeRadiusDirection, XfoilCase};
use airgen::geom::FilterConfig;
use airgen::train::{GridSpec, TrainConfig};
use airgen::vae::{Activation, BranchConfig, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every module seed is derived from it.
    pub seed: u64,
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub training: TrainConfig,
    pub grid: GridSpec,
    pub ga: GaConfig,
    pub xfoil: XfoilSection,
    pub optimize: OptimizeSection,
    pub evaluation: EvaluationSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dataset: DatasetSection::default(),
            model: ModelSection::default(),
            training: TrainConfig::desk(),
            grid: GridSpec::default(),
            ga: GaConfig::default(),
            xfoil: XfoilSection::default(),
            optimize: OptimizeSection::default(),
            evaluation: EvaluationSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub filter: FilterConfig,
    /// Modes stored with the dataset for the SVD baseline.
    pub svd_modes: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self { filter: FilterConfig::default(), svd_modes: 20 }
    }
}

/// Architecture shared by both branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_filter: usize,
    pub n_kernel: usize,
    /// Latents per branch, two of them physical.
    pub n_latent: usize,
    pub activation: Activation,
    pub conv_layers: usize,
    pub hidden: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        let b = ModelConfig::desk().camber;
        Self {
            n_filter: b.n_filter,
            n_kernel: b.n_kernel,
            n_latent: b.n_latent_total,
            activation: b.activation,
            conv_layers: b.conv_layers,
            hidden: b.hidden,
        }
    }
}

impl ModelSection {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig::symmetric(BranchConfig {
            n_filter: self.n_filter,
            n_kernel: self.n_kernel,
            n_latent_total: self.n_latent,
            activation: self.activation,
            conv_layers: self.conv_layers,
            hidden: self.hidden.clone(),
            ..BranchConfig::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Xfoil,
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XfoilSection {
    /// Solver binary; the `AIRGEN_XFOIL` environment variable overrides it.
    pub path: Option<PathBuf>,
    pub evaluator: EvaluatorKind,
    pub reynolds: f64,
    pub mach: f64,
    pub alpha_deg: f64,
    pub panels: usize,
    pub iterations: usize,
    pub timeout_secs: f64,
}

impl Default for XfoilSection {
    fn default() -> Self {
        let c = XfoilCase::default();
        Self {
            path: None,
            evaluator: EvaluatorKind::Xfoil,
            reynolds: c.reynolds,
            mach: c.mach,
            alpha_deg: c.alpha_deg,
            panels: c.panels,
            iterations: c.iterations,
            timeout_secs: c.timeout_secs,
        }
    }
}

impl XfoilSection {
    pub fn case(&self) -> XfoilCase {
        XfoilCase {
            reynolds: self.reynolds,
            mach: self.mach,
            alpha_deg: self.alpha_deg,
            panels: self.panels,
            iterations: self.iterations,
            timeout_secs: self.timeout_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub trials: usize,
    pub r_le_direction: LeRadiusDirection,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self { trials: 10, r_le_direction: LeRadiusDirection::Below }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Box samples for feasibility, correlation and parallel-coordinate
    /// exports.
    pub samples: usize,
    /// Inverse-fitting targets drawn from the validation split.
    pub targets: usize,
    pub fit_population: usize,
    pub fit_max_generations: usize,
    pub fit_stall_generations: usize,
    pub cdf_points: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            samples: 10_000,
            targets: 30,
            fit_population: 200,
            fit_max_generations: 1000,
            fit_stall_generations: 200,
            cdf_points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs") }
    }
}

/// Stream indices for derived seeds.
pub mod stream {
    pub const DATASET: usize = 0;
    pub const TRAINING: usize = 1;
    pub const GA: usize = 2;
    pub const SAMPLING: usize = 3;
    pub const SYNTHETIC: usize = 4;
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg: RunConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.resolve();
        Ok(cfg)
    }

    /// Fan the master seed out to module seeds.
    pub fn resolve(&mut self) {
        self.training.seed = self.seed_for(stream::TRAINING);
        self.ga.seed = self.seed_for(stream::GA);
    }

    pub fn seed_for(&self, stream: usize) -> u64 {
        trial_seed(self.seed, stream)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Write the resolved configuration into `dir`.
    pub fn write_resolved(&self, dir: &Path, command: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{command}.resolved.toml"));
        airgen::io::atomic_write(&path, self.to_toml().as_bytes())?;
        Ok(path)
    }
}

/// Fixed output layout below the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn datasets(&self) -> PathBuf {
        self.root.join("datasets")
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.root.join("checkpoints")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn airfoils(&self) -> PathBuf {
        self.root.join("airfoils")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.resolve();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[training]\nepoch = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[xfoil]\npath = \"/x\"\nreynolds = 1e6").is_ok());
    }

    #[test]
    fn seeds_fan_out_from_the_master() {
        let mut a: RunConfig = toml::from_str("seed = 5").unwrap();
        a.resolve();
        let mut b: RunConfig = toml::from_str("seed = 6").unwrap();
        b.resolve();
        assert_ne!(a.training.seed, b.training.seed);
        assert_ne!(a.training.seed, a.ga.seed);
        let mut again: RunConfig = toml::from_str(&a.to_toml()).unwrap();
        again.resolve();
        assert_eq!(again, a);
    }
}
