//! The two-branch generator: convolutional encoders for the camber and
//! thickness distributions, a latent split into physical and free parts,
//! dense decoders that emit regulated control-net variables, the loss terms
//! with their gradients, and checkpoints.

mod checkpoint;
mod generator;
mod gradcheck;
mod latent;
mod loss;
mod model;
pub mod nn;

use thiserror::Error;

pub use checkpoint::{Checkpoint, LossRecord, TrainingMeta, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use generator::AirfoilGenerator;
pub use gradcheck::{gradient_check, GradCheck};
pub use latent::{latent_box_or_range, update_latent_box, LatentBox, MIN_BOX_SAMPLES};
pub use loss::{loss, loss_and_grad, mse_phys_random, LossBreakdown, LossConfig, LossOutput};
pub use model::{BranchConfig, BranchLatent, Decoded, LatentCode, Model, ModelConfig, LOGVAR_CLAMP, PHYSICAL_PER_BRANCH};
pub use nn::Activation;

use crate::curves::CurveError;

#[derive(Debug, Error)]
pub enum VaeError {
    #[error("expected length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("model has no fitted feature normalizer")]
    UnfittedNormalizer,
    #[error("need at least {need} latent vectors, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptFile(String),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("latent dimension {dim} out of range (latent size {size})")]
    DimOutOfRange { dim: usize, size: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
