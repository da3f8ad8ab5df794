use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::nn::{Activation, Allocator, Conv1d, Dense, TensorInfo};
use super::VaeError;
use crate::curves::{net_to_distribution, realize_control_net, DistributionEval, NetKind, RegulatedControlNet};
use crate::geom::{cosine_grid, AirfoilSection, Feature, FeatureNormalizer, ThicknessCamber};

pub const LOGVAR_CLAMP: f64 = 20.0;
/// Number of physical latents per branch.
pub const PHYSICAL_PER_BRANCH: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub n_filter: usize,
    pub n_kernel: usize,
    /// Physical plus free latents of this branch.
    pub n_latent_total: usize,
    pub n_latent_physical: usize,
    pub activation: Activation,
    pub conv_layers: usize,
    pub hidden: Vec<usize>,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            n_filter: 32,
            n_kernel: 7,
            n_latent_total: 6,
            n_latent_physical: PHYSICAL_PER_BRANCH,
            activation: Activation::Gelu,
            conv_layers: 3,
            hidden: vec![64, 128],
        }
    }
}

impl BranchConfig {
    pub fn n_free(&self) -> usize {
        self.n_latent_total - self.n_latent_physical
    }

    pub fn validate(&self) -> Result<(), VaeError> {
        let bad = |m: &str| Err(VaeError::InvalidConfig(m.to_string()));
        if self.n_latent_physical != PHYSICAL_PER_BRANCH {
            return bad("each branch has exactly two physical latents");
        }
        if self.n_latent_total <= self.n_latent_physical {
            return bad("n_latent_total must exceed n_latent_physical");
        }
        if self.n_kernel % 2 == 0 {
            return bad("n_kernel must be odd");
        }
        if self.n_filter == 0 || self.conv_layers == 0 {
            return bad("n_filter and conv_layers must be positive");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub camber: BranchConfig,
    pub thickness: BranchConfig,
    /// x-stations of the encoder input and decoder output.
    pub grid: Vec<f64>,
    /// Factor applied to distributions before the first convolution.
    pub input_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { camber: BranchConfig::default(), thickness: BranchConfig::default(), grid: cosine_grid(), input_scale: 10.0 }
    }
}

impl ModelConfig {
    /// Small network for laptop-scale runs: 8 filters and five latents per
    /// branch (ten in total).
    pub fn desk() -> Self {
        Self::symmetric(BranchConfig { n_filter: 8, n_latent_total: 5, ..BranchConfig::default() })
    }

    /// Same architecture for both branches.
    pub fn symmetric(branch: BranchConfig) -> Self {
        Self { camber: branch.clone(), thickness: branch, ..Self::default() }
    }

    pub fn latent_dim(&self) -> usize {
        self.camber.n_latent_total + self.thickness.n_latent_total
    }

    pub fn validate(&self) -> Result<(), VaeError> {
        self.camber.validate()?;
        self.thickness.validate()?;
        if self.grid.len() < 2 {
            return Err(VaeError::InvalidConfig("grid needs at least two points".into()));
        }
        Ok(())
    }

    /// Position of a physical latent in the full latent vector. Camber
    /// latents come first, thickness latents second; each branch lists its
    /// physical latents before its free ones.
    pub fn phys_index(&self, f: Feature) -> usize {
        match f {
            Feature::MaxCamber => 0,
            Feature::TeAngle => 1,
            Feature::MaxThickness => self.camber.n_latent_total,
            Feature::LeRadius => self.camber.n_latent_total + 1,
        }
    }

    pub fn physical_indices(&self) -> [usize; 4] {
        Feature::ALL.map(|f| self.phys_index(f))
    }

    pub fn free_indices(&self) -> Vec<usize> {
        let nc = self.camber.n_latent_total;
        (2..nc).chain(nc + 2..self.latent_dim()).collect()
    }
}

/// Encoder output of one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchLatent {
    pub mu_p: Vec<f64>,
    pub mu_f: Vec<f64>,
    pub logvar_f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCode {
    pub camber: BranchLatent,
    pub thickness: BranchLatent,
}

impl LatentCode {
    /// Full latent vector of means.
    pub fn means(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for b in [&self.camber, &self.thickness] {
            v.extend_from_slice(&b.mu_p);
            v.extend_from_slice(&b.mu_f);
        }
        v
    }
}

/// Decoder output: both control nets and the sampled distributions.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub camber_net: RegulatedControlNet,
    pub thickness_net: RegulatedControlNet,
    pub tc: ThicknessCamber,
}

impl Decoded {
    pub fn section(&self) -> AirfoilSection {
        self.tc.recompose()
    }
}

pub(crate) struct EncCache {
    /// Input of every conv layer plus the flattened head input.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

pub(crate) struct DecCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

/// One encoder/decoder pair.
#[derive(Debug, Clone)]
pub struct Branch {
    pub kind: NetKind,
    pub cfg: BranchConfig,
    convs: Vec<Conv1d>,
    head: Dense,
    dec: Vec<Dense>,
}

impl Branch {
    fn new(alloc: &mut Allocator, prefix: &str, kind: NetKind, cfg: &BranchConfig, grid_len: usize) -> Self {
        let mut convs = Vec::new();
        let (mut c_in, mut len) = (1, grid_len);
        for i in 0..cfg.conv_layers {
            let conv = Conv1d::new(alloc, &format!("{prefix}.enc.conv{i}"), c_in, cfg.n_filter, cfg.n_kernel, 2, len);
            c_in = cfg.n_filter;
            len = conv.l_out;
            convs.push(conv);
        }
        let head = Dense::new(alloc, &format!("{prefix}.enc.head"), c_in * len, cfg.n_latent_physical + 2 * cfg.n_free());
        let mut dec = Vec::new();
        let mut n_in = cfg.n_latent_total;
        for (i, &h) in cfg.hidden.iter().enumerate() {
            dec.push(Dense::new(alloc, &format!("{prefix}.dec.fc{i}"), n_in, h));
            n_in = h;
        }
        dec.push(Dense::new(alloc, &format!("{prefix}.dec.out"), n_in, kind.free_len()));
        Self { kind, cfg: cfg.clone(), convs, head, dec }
    }

    fn init(&self, params: &mut [f64], rng: &mut ChaCha8Rng) {
        let mut fill = |range: std::ops::Range<usize>, bound: f64| {
            for v in &mut params[range] {
                *v = rng.random_range(-bound..bound);
            }
        };
        for c in &self.convs {
            let b = 1.0 / (c.fan_in() as f64).sqrt();
            fill(c.weight_range(), b);
            fill(c.bias_range(), b);
        }
        let b = 1.0 / (self.head.fan_in() as f64).sqrt();
        fill(self.head.weight_range(), b);
        fill(self.head.bias_range(), b);
        let last = self.dec.len() - 1;
        for (i, d) in self.dec.iter().enumerate() {
            let b = 1.0 / (d.fan_in() as f64).sqrt();
            if i == last {
                fill(d.weight_range(), 0.1 * b);
            } else {
                fill(d.weight_range(), b);
                fill(d.bias_range(), b);
            }
        }
        // start from evenly spaced control abscissae and a thin section
        let out = &self.dec[last];
        let x_slots = self.kind.free_len() - (crate::curves::NET_POINTS - 2);
        let y0 = match self.kind {
            NetKind::Thickness => 0.05,
            NetKind::Camber => 0.01,
        };
        for (j, v) in params[out.bias_range()].iter_mut().enumerate() {
            *v = if j < x_slots { 1.0 } else { y0 };
        }
    }

    pub(crate) fn encode_forward(&self, p: &[f64], input: &[f64], scale: f64) -> (Vec<f64>, EncCache) {
        let act = self.cfg.activation;
        let mut inputs = Vec::with_capacity(self.convs.len() + 1);
        let mut pre = Vec::with_capacity(self.convs.len());
        let mut a: Vec<f64> = input.iter().map(|v| v * scale).collect();
        for conv in &self.convs {
            let mut z = vec![0.0; conv.out_len()];
            conv.forward(p, &a, &mut z);
            let next = z.iter().map(|&v| act.apply(v)).collect();
            inputs.push(std::mem::replace(&mut a, next));
            pre.push(z);
        }
        let mut out = vec![0.0; self.head.n_out];
        self.head.forward(p, &a, &mut out);
        inputs.push(a);
        let np = self.cfg.n_latent_physical;
        for v in &mut out[np + self.cfg.n_free()..] {
            *v = v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP);
        }
        (out, EncCache { inputs, pre })
    }

    /// `g_out` is the gradient with respect to `[mu_p, mu_f, logvar_f]`
    /// (already zeroed where the log-variance clamp is active).
    pub(crate) fn encode_backward(&self, p: &[f64], cache: &EncCache, g_out: &[f64], g: &mut [f64]) {
        let act = self.cfg.activation;
        let n = self.convs.len();
        let mut ga = vec![0.0; cache.inputs[n].len()];
        self.head.backward(p, &cache.inputs[n], g_out, g, Some(&mut ga));
        for (i, conv) in self.convs.iter().enumerate().rev() {
            let gz: Vec<f64> = ga.iter().zip(&cache.pre[i]).map(|(g, z)| g * act.derivative(*z)).collect();
            if i == 0 {
                conv.backward(p, &cache.inputs[i], &gz, g, None);
            } else {
                let mut gx = vec![0.0; cache.inputs[i].len()];
                conv.backward(p, &cache.inputs[i], &gz, g, Some(&mut gx));
                ga = gx;
            }
        }
    }

    pub(crate) fn decode_forward(&self, p: &[f64], z: &[f64]) -> (Vec<f64>, DecCache) {
        let act = self.cfg.activation;
        let last = self.dec.len() - 1;
        let mut inputs = Vec::with_capacity(self.dec.len());
        let mut pre = Vec::with_capacity(last);
        let mut a = z.to_vec();
        for (i, d) in self.dec.iter().enumerate() {
            let mut y = vec![0.0; d.n_out];
            d.forward(p, &a, &mut y);
            inputs.push(a);
            if i == last {
                return (y, DecCache { inputs, pre });
            }
            a = y.iter().map(|&v| act.apply(v)).collect();
            pre.push(y);
        }
        unreachable!("decoder has an output layer")
    }

    /// Returns the gradient with respect to the latent input.
    pub(crate) fn decode_backward(&self, p: &[f64], cache: &DecCache, g_free: &[f64], g: &mut [f64]) -> Vec<f64> {
        let act = self.cfg.activation;
        let mut gy = g_free.to_vec();
        for (i, d) in self.dec.iter().enumerate().rev() {
            let mut gx = vec![0.0; d.n_in];
            d.backward(p, &cache.inputs[i], &gy, g, Some(&mut gx));
            if i == 0 {
                return gx;
            }
            gy = gx.iter().zip(&cache.pre[i - 1]).map(|(g, z)| g * act.derivative(*z)).collect();
        }
        unreachable!("decoder has at least one layer")
    }

    /// Decoder output realised as a net and sampled on `grid`.
    pub(crate) fn realize(&self, free: &[f64], grid: &[f64]) -> Result<(RegulatedControlNet, DistributionEval), VaeError> {
        let net = realize_control_net(self.kind, free)?;
        let dist = net_to_distribution(&net, grid)?;
        Ok((net, dist))
    }

    /// Zero every decoder weight reading latent `k` of this branch.
    pub fn zero_latent_input(&self, params: &mut [f64], k: usize) {
        let d = &self.dec[0];
        let w = d.weight_range();
        for o in 0..d.n_out {
            params[w.start + o * d.n_in + k] = 0.0;
        }
    }
}

/// The two-branch generator.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Vec<f64>,
    pub tensors: Vec<TensorInfo>,
    pub camber: Branch,
    pub thickness: Branch,
    pub normalizer: Option<FeatureNormalizer>,
}

impl Model {
    fn layout(config: &ModelConfig) -> (Branch, Branch, Allocator) {
        let mut alloc = Allocator::default();
        let g = config.grid.len();
        let camber = Branch::new(&mut alloc, "camber", NetKind::Camber, &config.camber, g);
        let thickness = Branch::new(&mut alloc, "thickness", NetKind::Thickness, &config.thickness, g);
        (camber, thickness, alloc)
    }

    /// Freshly initialised model; all randomness comes from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, VaeError> {
        config.validate()?;
        let (camber, thickness, alloc) = Self::layout(&config);
        let mut params = vec![0.0; alloc.size];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        camber.init(&mut params, &mut rng);
        thickness.init(&mut params, &mut rng);
        Ok(Self { config, params, tensors: alloc.tensors, camber, thickness, normalizer: None })
    }

    /// Rebuild a model around existing parameters.
    pub fn from_params(config: ModelConfig, params: Vec<f64>) -> Result<Self, VaeError> {
        config.validate()?;
        let (camber, thickness, alloc) = Self::layout(&config);
        if params.len() != alloc.size {
            return Err(VaeError::ShapeMismatch { expected: alloc.size, got: params.len() });
        }
        Ok(Self { config, params, tensors: alloc.tensors, camber, thickness, normalizer: None })
    }

    pub fn with_normalizer(mut self, normalizer: FeatureNormalizer) -> Self {
        self.normalizer = Some(normalizer);
        self
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn branches(&self) -> [&Branch; 2] {
        [&self.camber, &self.thickness]
    }

    /// Split a full latent vector into the camber and thickness parts.
    pub fn split_latent<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        z.split_at(self.config.camber.n_latent_total)
    }

    fn check_input(&self, v: &[f64]) -> Result<(), VaeError> {
        if v.len() != self.config.grid.len() {
            return Err(VaeError::ShapeMismatch { expected: self.config.grid.len(), got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(VaeError::NonFinite);
        }
        Ok(())
    }

    pub fn encode(&self, tc: &ThicknessCamber) -> Result<LatentCode, VaeError> {
        self.check_input(&tc.t)?;
        self.check_input(&tc.c)?;
        let mut out = [&tc.c, &tc.t].into_iter().zip(self.branches()).map(|(input, br)| {
            let (o, _) = br.encode_forward(&self.params, input, self.config.input_scale);
            let (np, nf) = (br.cfg.n_latent_physical, br.cfg.n_free());
            BranchLatent { mu_p: o[..np].to_vec(), mu_f: o[np..np + nf].to_vec(), logvar_f: o[np + nf..].to_vec() }
        });
        let camber = out.next().expect("two branches");
        let thickness = out.next().expect("two branches");
        Ok(LatentCode { camber, thickness })
    }

    /// `z_f = mu_f + exp(logvar_f / 2) * eps`; physical latents pass through.
    pub fn reparameterize<R: Rng>(&self, code: &LatentCode, rng: &mut R) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.latent_dim());
        for b in [&code.camber, &code.thickness] {
            z.extend_from_slice(&b.mu_p);
            for (m, lv) in b.mu_f.iter().zip(&b.logvar_f) {
                let eps: f64 = rng.sample(StandardNormal);
                z.push(m + (0.5 * lv.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP)).exp() * eps);
            }
        }
        z
    }

    pub fn decode(&self, z: &[f64]) -> Result<Decoded, VaeError> {
        if z.len() != self.latent_dim() {
            return Err(VaeError::ShapeMismatch { expected: self.latent_dim(), got: z.len() });
        }
        let (zc, zt) = self.split_latent(z);
        let (fc, _) = self.camber.decode_forward(&self.params, zc);
        let (ft, _) = self.thickness.decode_forward(&self.params, zt);
        let grid = &self.config.grid;
        let (camber_net, dc) = self.camber.realize(&fc, grid)?;
        let (thickness_net, dt) = self.thickness.realize(&ft, grid)?;
        let tc = ThicknessCamber::new(grid.clone(), dt.values, dc.values);
        Ok(Decoded { camber_net, thickness_net, tc })
    }

    pub fn decode_section(&self, z: &[f64]) -> Result<AirfoilSection, VaeError> {
        Ok(self.decode(z)?.section())
    }

    /// Encode and decode the latent means.
    pub fn reconstruct(&self, tc: &ThicknessCamber) -> Result<ThicknessCamber, VaeError> {
        Ok(self.decode(&self.encode(tc)?.means())?.tc)
    }

    /// Zero the decoder's dependence on latent `k` (diagnostics and tests).
    pub fn disconnect_latent(&mut self, k: usize) {
        let nc = self.config.camber.n_latent_total;
        let mut params = std::mem::take(&mut self.params);
        if k < nc {
            self.camber.zero_latent_input(&mut params, k);
        } else {
            self.thickness.zero_latent_input(&mut params, k - nc);
        }
        self.params = params;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Model {
        let branch = BranchConfig { n_filter: 4, n_latent_total: 5, ..BranchConfig::default() };
        Model::new(ModelConfig::symmetric(branch), 1).unwrap()
    }

    #[test]
    fn zero_input_gives_finite_latents() {
        let m = small();
        let g = cosine_grid();
        let tc = ThicknessCamber::new(g.clone(), vec![0.0; g.len()], vec![0.0; g.len()]);
        let code = m.encode(&tc).unwrap();
        assert!(code.means().iter().chain(&code.camber.logvar_f).all(|v| v.is_finite()));
        assert_eq!(m.encode(&tc).unwrap(), code);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = small();
        let tc = ThicknessCamber::new(vec![0.0; 5], vec![0.0; 5], vec![0.0; 5]);
        assert!(matches!(m.encode(&tc), Err(VaeError::ShapeMismatch { .. })));
    }

    #[test]
    fn decode_is_deterministic_and_feasible() {
        let m = small();
        let z: Vec<f64> = (0..10).map(|i| (i as f64 - 4.5) * 0.7).collect();
        let a = m.decode(&z).unwrap();
        let b = m.decode(&z).unwrap();
        assert_eq!(a.tc, b.tc);
        assert!(a.tc.t.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn clamped_logvar_reproduces_mean() {
        let m = small();
        let code = LatentCode {
            camber: BranchLatent { mu_p: vec![0.1, 0.2], mu_f: vec![0.3; 3], logvar_f: vec![-1e9; 3] },
            thickness: BranchLatent { mu_p: vec![0.4, 0.5], mu_f: vec![-0.3; 3], logvar_f: vec![-1e9; 3] },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = m.reparameterize(&code, &mut rng);
        for (a, b) in z.iter().zip(code.means()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn reparameterization_moments() {
        let m = small();
        let code = LatentCode {
            camber: BranchLatent { mu_p: vec![0.0; 2], mu_f: vec![0.5, -1.0, 2.0], logvar_f: vec![0.0, 1.0, -1.0] },
            thickness: BranchLatent { mu_p: vec![0.0; 2], mu_f: vec![0.0; 3], logvar_f: vec![0.0; 3] },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut sum = [0.0; 3];
        for _ in 0..n {
            let z = m.reparameterize(&code, &mut rng);
            for j in 0..3 {
                sum[j] += z[2 + j];
            }
        }
        for j in 0..3 {
            let sigma = (0.5 * code.camber.logvar_f[j]).exp();
            let mean = sum[j] / n as f64;
            assert!((mean - code.camber.mu_f[j]).abs() < 3.0 * sigma / (n as f64).sqrt());
        }
    }
}
