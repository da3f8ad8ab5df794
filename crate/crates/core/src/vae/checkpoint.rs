//! Binary checkpoint: `AGCK` magic, `u32` version, `u64` header length,
//! JSON header (configuration, normalizer, latent box, training metadata
//! and the tensor table), little-endian `f64` parameters and a SHA-256
//! trailer over everything before it.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::latent::LatentBox;
use super::model::{Model, ModelConfig};
use super::nn::TensorInfo;
use super::VaeError;
use crate::geom::FeatureNormalizer;
use crate::io::atomic_write;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"AGCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

/// One row of the per-epoch loss history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub recon: f64,
    pub kld: f64,
    pub phys_train: f64,
    pub phys_random: f64,
    pub total: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epoch: usize,
    pub seed: u64,
    pub beta: f64,
    pub lambda: f64,
    pub latent_sampling: bool,
    pub history: Vec<LossRecord>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub latent_box: LatentBox,
    pub meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    normalizer: Option<FeatureNormalizer>,
    latent_box: LatentBox,
    meta: TrainingMeta,
    tensors: Vec<TensorInfo>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.model.config.clone(),
            normalizer: self.model.normalizer.clone(),
            latent_box: self.latent_box.clone(),
            meta: self.meta.clone(),
            tensors: self.model.tensors.clone(),
        };
        let json = serde_json::to_vec(&header).expect("checkpoint header serializes");
        let mut out = Vec::with_capacity(16 + json.len() + 8 * self.model.params.len() + DIGEST_LEN);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.model.params {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VaeError> {
        let corrupt = |m: &str| VaeError::CorruptFile(m.to_string());
        if bytes.len() < 16 + DIGEST_LEN {
            return Err(corrupt("file is truncated"));
        }
        if &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(corrupt("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(VaeError::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch"));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let header_end = 16usize.checked_add(hlen).filter(|&e| e <= body.len()).ok_or_else(|| corrupt("bad header length"))?;
        let header: Header =
            serde_json::from_slice(&body[16..header_end]).map_err(|e| corrupt(&format!("header: {e}")))?;
        let raw = &body[header_end..];
        if raw.len() % 8 != 0 {
            return Err(corrupt("parameter block is not a whole number of f64 values"));
        }
        let params: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let mut model = Model::from_params(header.config, params)?;
        if model.tensors != header.tensors {
            return Err(corrupt("tensor table does not match the configuration"));
        }
        model.normalizer = header.normalizer;
        Ok(Self { model, latent_box: header.latent_box, meta: header.meta })
    }

    pub fn save(&self, path: &Path) -> Result<(), VaeError> {
        atomic_write(path, &self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VaeError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
