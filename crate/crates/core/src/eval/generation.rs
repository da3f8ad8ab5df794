use std::path::Path;

use rand::Rng;

use crate::geom::{decompose, AirfoilSection, Feature};
use crate::io::write_csv_table;
use crate::vae::{Checkpoint, VaeError};

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalStep {
    pub value: f64,
    pub section: AirfoilSection,
}

/// Encode `base`, then sweep latent `dim` across the latent box in
/// `n_steps` evenly spaced values, keeping the other coordinates at the
/// encoder means. Zero steps returns the plain reconstruction.
pub fn latent_traversal(
    ckpt: &Checkpoint,
    base: &AirfoilSection,
    dim: usize,
    n_steps: usize,
) -> Result<Vec<TraversalStep>, VaeError> {
    let size = ckpt.model.latent_dim();
    if dim >= size {
        return Err(VaeError::DimOutOfRange { dim, size });
    }
    let mut z = ckpt.model.encode(&decompose(base))?.means();
    if n_steps == 0 {
        return Ok(vec![TraversalStep { value: z[dim], section: ckpt.model.decode_section(&z)? }]);
    }
    let (lo, hi) = (ckpt.latent_box.lo[dim], ckpt.latent_box.hi[dim]);
    (0..n_steps)
        .map(|i| {
            let f = if n_steps == 1 { 0.5 } else { i as f64 / (n_steps - 1) as f64 };
            z[dim] = lo + f * (hi - lo);
            Ok(TraversalStep { value: z[dim], section: ckpt.model.decode_section(&z)? })
        })
        .collect()
}

/// Long-format table `step, latent_value, x, y_upper, y_lower`.
pub fn write_traversal_csv(path: &Path, steps: &[TraversalStep]) -> std::io::Result<()> {
    let rows: Vec<Vec<f64>> = steps
        .iter()
        .enumerate()
        .flat_map(|(k, s)| (0..s.section.len()).map(move |i| vec![k as f64, s.value, s.section.x[i], s.section.y_upper[i], s.section.y_lower[i]]))
        .collect();
    write_csv_table(path, &["step", "latent_value", "x", "y_upper", "y_lower"], &rows)
}

/// Decode `n` sections with the given physical latents pinned (normalized
/// feature values in [0, 1]) and all other coordinates drawn uniformly in
/// the latent box.
pub fn constrained_generate<R: Rng>(
    ckpt: &Checkpoint,
    fixed: &[(Feature, f64)],
    n: usize,
    rng: &mut R,
) -> Result<Vec<AirfoilSection>, VaeError> {
    for (f, v) in fixed {
        if !(0.0..=1.0).contains(v) {
            return Err(VaeError::InvalidConfig(format!("{} must be a normalized value in [0, 1], got {v}", f.name())));
        }
    }
    (0..n)
        .map(|_| {
            let mut z = ckpt.latent_box.sample(rng);
            for &(f, v) in fixed {
                z[ckpt.model.config.phys_index(f)] = v;
            }
            ckpt.model.decode_section(&z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::cosine_grid;
    use crate::geom::naca::naca4_section;
    use crate::vae::{BranchConfig, LatentBox, Model, ModelConfig, TrainingMeta};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn checkpoint() -> Checkpoint {
        let branch = BranchConfig { n_filter: 2, n_latent_total: 3, hidden: vec![8], ..BranchConfig::default() };
        let model = Model::new(ModelConfig::symmetric(branch), 5).unwrap();
        let d = model.latent_dim();
        Checkpoint {
            model,
            latent_box: LatentBox { lo: vec![-1.0; d], hi: vec![1.0; d], mean: vec![0.0; d] },
            meta: TrainingMeta::default(),
        }
    }

    #[test]
    fn zero_steps_is_the_reconstruction() {
        let ck = checkpoint();
        let base = naca4_section(0.02, 0.4, 0.12, &cosine_grid());
        let steps = latent_traversal(&ck, &base, 0, 0).unwrap();
        assert_eq!(steps.len(), 1);
        let z = ck.model.encode(&decompose(&base)).unwrap().means();
        assert_eq!(steps[0].section, ck.model.decode_section(&z).unwrap());
    }

    #[test]
    fn sweep_spans_the_box() {
        let ck = checkpoint();
        let base = naca4_section(0.0, 0.4, 0.1, &cosine_grid());
        let steps = latent_traversal(&ck, &base, 4, 5).unwrap();
        let v: Vec<f64> = steps.iter().map(|s| s.value).collect();
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fig11_traversal.csv");
        write_traversal_csv(&p, &steps).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap().lines().count(), 1 + 5 * 101);
    }

    #[test]
    fn out_of_range_dim_is_rejected() {
        let ck = checkpoint();
        let base = AirfoilSection::flat();
        assert!(matches!(latent_traversal(&ck, &base, 6, 3), Err(VaeError::DimOutOfRange { dim: 6, size: 6 })));
    }

    #[test]
    fn pinned_generation() {
        let ck = checkpoint();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(constrained_generate(&ck, &[], 0, &mut rng).unwrap().is_empty());
        let all = Feature::ALL.map(|f| (f, 0.5));
        let out = constrained_generate(&ck, &all, 20, &mut rng).unwrap();
        assert_eq!(out.len(), 20);
        assert!(out.iter().all(|s| s.is_feasible(crate::geom::FEASIBILITY_TOL)));
        assert!(constrained_generate(&ck, &[(Feature::MaxThickness, 1.5)], 1, &mut rng).is_err());
    }
}
