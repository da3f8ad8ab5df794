use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::latent::{latent_box_or_range, LatentBox};
use super::model::{Branch, Model, LOGVAR_CLAMP};
use super::VaeError;
use crate::curves::BranchFeatureGrad;
use crate::geom::{Feature, FeatureNormalizer, ThicknessCamber};

/// Physical features of each branch, in latent order.
const CAMBER_FEATURES: [Feature; 2] = [Feature::MaxCamber, Feature::TeAngle];
const THICKNESS_FEATURES: [Feature; 2] = [Feature::MaxThickness, Feature::LeRadius];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub beta: f64,
    pub lambda: f64,
    /// Include the physical loss on airfoils decoded from box samples.
    pub latent_sampling: bool,
    /// Box samples per evaluation; 0 means one per batch sample.
    pub n_random: usize,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { beta: 2.5e-8, lambda: 1e-5, latent_sampling: true, n_random: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub recon_mse: f64,
    pub kld: f64,
    pub mse_phys_train: f64,
    pub mse_phys_random: f64,
    pub total: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl LossBreakdown {
    fn assemble(recon_mse: f64, kld: f64, train: f64, random: f64, cfg: &LossConfig) -> Self {
        let total = recon_mse + cfg.beta * kld + cfg.lambda * (train + random);
        Self { recon_mse, kld, mse_phys_train: train, mse_phys_random: random, total, beta: cfg.beta, lambda: cfg.lambda }
    }
}

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub breakdown: LossBreakdown,
    /// Gradient of `total` with respect to the flat parameter vector.
    pub grad: Vec<f64>,
    /// Latent means of the batch, in full-latent order.
    pub latent_means: Vec<Vec<f64>>,
    /// Box used for the sampling term.
    pub latent_box: LatentBox,
}

fn branch_features(br: &Branch) -> [Feature; 2] {
    match br.kind {
        crate::curves::NetKind::Camber => CAMBER_FEATURES,
        crate::curves::NetKind::Thickness => THICKNESS_FEATURES,
    }
}

/// Squared physical error of one decoded branch; accumulates the gradient
/// `scale * d/d(features)` into the control-point gradients.
fn phys_term(
    nrm: &FeatureNormalizer,
    feats: [Feature; 2],
    fg: &BranchFeatureGrad,
    latent: &[f64],
    scale: f64,
    gx: &mut [f64],
    gy: &mut [f64],
    g_latent: Option<&mut [f64]>,
) -> f64 {
    let mut sum = 0.0;
    let mut gl = [0.0; 2];
    for k in 0..2 {
        let fhat = nrm.normalize_value(feats[k], fg.values[k]);
        let r = fhat - latent[k];
        sum += r * r;
        let g_raw = scale * 2.0 * r * nrm.normalize_derivative(feats[k], fg.values[k]);
        for j in 0..gx.len() {
            gx[j] += g_raw * fg.grad_x[k][j];
            gy[j] += g_raw * fg.grad_y[k][j];
        }
        gl[k] = -scale * 2.0 * r;
    }
    if let Some(g) = g_latent {
        g[0] += gl[0];
        g[1] += gl[1];
    }
    sum
}

/// Loss terms and their gradient for a full batch.
///
/// Latent box: `fixed_box` if given, otherwise the box of this batch's
/// latent means (percentile box, or min/max below 100 samples).
pub fn loss_and_grad<R: Rng>(
    model: &Model,
    batch: &[ThicknessCamber],
    cfg: &LossConfig,
    rng: &mut R,
    fixed_box: Option<&LatentBox>,
) -> Result<LossOutput, VaeError> {
    if batch.is_empty() {
        return Err(VaeError::EmptyBatch);
    }
    let nrm = model.normalizer.as_ref().ok_or(VaeError::UnfittedNormalizer)?;
    let p = &model.params;
    let grid = &model.config.grid;
    let b = batch.len() as f64;
    let n_points = 2.0 * grid.len() as f64;
    let mut grad = vec![0.0; p.len()];
    let (mut recon, mut kld, mut phys) = (0.0, 0.0, 0.0);
    let mut latent_means = Vec::with_capacity(batch.len());

    for tc in batch {
        if tc.t.len() != grid.len() {
            return Err(VaeError::ShapeMismatch { expected: grid.len(), got: tc.t.len() });
        }
        let mut means = Vec::with_capacity(model.latent_dim());
        for (br, target) in model.branches().into_iter().zip([&tc.c, &tc.t]) {
            let (np, nf) = (br.cfg.n_latent_physical, br.cfg.n_free());
            let (out, ecache) = br.encode_forward(p, target, model.config.input_scale);
            let (mu_p, rest) = out.split_at(np);
            let (mu_f, lv) = rest.split_at(nf);
            means.extend_from_slice(mu_p);
            means.extend_from_slice(mu_f);

            let eps: Vec<f64> = (0..nf).map(|_| rng.sample(StandardNormal)).collect();
            let mut z = mu_p.to_vec();
            z.extend(mu_f.iter().zip(lv).zip(&eps).map(|((m, l), e)| m + (0.5 * l).exp() * e));

            let (free, dcache) = br.decode_forward(p, &z);
            let (net, dist) = br.realize(&free, grid)?;
            let g_vals: Vec<f64> = dist
                .values
                .iter()
                .zip(target.iter())
                .map(|(y, t)| {
                    recon += (y - t) * (y - t);
                    2.0 * (y - t) / (b * n_points)
                })
                .collect();
            let (mut gx, mut gy) = dist.backward(&g_vals);

            let mut g_out = vec![0.0; np + 2 * nf];
            let fg = net.features_with_grad();
            phys += phys_term(nrm, branch_features(br), &fg, mu_p, cfg.lambda / (b * 4.0), &mut gx, &mut gy, Some(&mut g_out[..np]));

            let g_free = net.backward(&gx, &gy);
            let gz = br.decode_backward(p, &dcache, &g_free, &mut grad);
            for k in 0..np {
                g_out[k] += gz[k];
            }
            for j in 0..nf {
                let (m, l) = (mu_f[j], lv[j]);
                let sigma = (0.5 * l).exp();
                kld += -0.5 * (1.0 + l - m * m - l.exp());
                g_out[np + j] = gz[np + j] + cfg.beta * m / b;
                g_out[np + nf + j] = if l.abs() >= LOGVAR_CLAMP {
                    0.0
                } else {
                    gz[np + j] * eps[j] * 0.5 * sigma + cfg.beta * 0.5 * (l.exp() - 1.0) / b
                };
            }
            br.encode_backward(p, &ecache, &g_out, &mut grad);
        }
        latent_means.push(means);
    }

    let latent_box = match fixed_box {
        Some(bx) => bx.clone(),
        None => latent_box_or_range(&latent_means),
    };
    let random = if cfg.latent_sampling {
        let n_r = if cfg.n_random == 0 { batch.len() } else { cfg.n_random };
        random_phys_term(model, nrm, &latent_box, n_r, cfg.lambda, rng, Some(&mut grad))?
    } else {
        0.0
    };

    let breakdown = LossBreakdown::assemble(recon / (b * n_points), kld / b, phys / (b * 4.0), random, cfg);
    Ok(LossOutput { breakdown, grad, latent_means, latent_box })
}

/// Mean squared physical error over `n` airfoils decoded from uniform box
/// samples, the target being the sampled physical coordinates. With
/// `grad`, accumulates `weight * d/dparams` of that mean.
fn random_phys_term<R: Rng>(
    model: &Model,
    nrm: &FeatureNormalizer,
    latent_box: &LatentBox,
    n: usize,
    weight: f64,
    rng: &mut R,
    mut grad: Option<&mut Vec<f64>>,
) -> Result<f64, VaeError> {
    let p = &model.params;
    let scale = weight / (n as f64 * 4.0);
    let mut sum = 0.0;
    for _ in 0..n {
        let z = latent_box.sample(rng);
        let (zc, zt) = model.split_latent(&z);
        for (br, zb) in model.branches().into_iter().zip([zc, zt]) {
            let (free, dcache) = br.decode_forward(p, zb);
            let net = crate::curves::realize_control_net(br.kind, &free)?;
            let fg = net.features_with_grad();
            let mut gx = [0.0; crate::curves::NET_POINTS];
            let mut gy = [0.0; crate::curves::NET_POINTS];
            sum += phys_term(nrm, branch_features(br), &fg, zb, scale, &mut gx, &mut gy, None);
            if let Some(g) = grad.as_deref_mut() {
                let g_free = net.backward(&gx, &gy);
                br.decode_backward(p, &dcache, &g_free, g);
            }
        }
    }
    Ok(sum / (n as f64 * 4.0))
}

/// Evaluate the sampling term alone (no gradient).
pub fn mse_phys_random<R: Rng>(model: &Model, latent_box: &LatentBox, n: usize, rng: &mut R) -> Result<f64, VaeError> {
    let nrm = model.normalizer.as_ref().ok_or(VaeError::UnfittedNormalizer)?;
    random_phys_term(model, nrm, latent_box, n.max(1), 0.0, rng, None)
}

/// Loss terms without gradients.
pub fn loss<R: Rng>(
    model: &Model,
    batch: &[ThicknessCamber],
    cfg: &LossConfig,
    rng: &mut R,
    fixed_box: Option<&LatentBox>,
) -> Result<LossBreakdown, VaeError> {
    Ok(loss_and_grad(model, batch, cfg, rng, fixed_box)?.breakdown)
}
