//! Minimal dense and 1-D convolution layers with hand-written backward
//! passes. Parameters live in one flat vector owned by the model; layers
//! only hold offsets into it.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

const LEAKY_SLOPE: f64 = 0.01;
const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Gelu,
    Relu,
    #[serde(alias = "leaky_relu")]
    LeakyRelu,
}

impl Activation {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gelu" => Some(Self::Gelu),
            "relu" => Some(Self::Relu),
            "leakyrelu" | "leaky_relu" => Some(Self::LeakyRelu),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gelu => "gelu",
            Self::Relu => "relu",
            Self::LeakyRelu => "leakyrelu",
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Gelu => 0.5 * x * (1.0 + erf(x * INV_SQRT_2)),
            Self::Relu => x.max(0.0),
            Self::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Gelu => 0.5 * (1.0 + erf(x * INV_SQRT_2)) + x * INV_SQRT_2PI * (-0.5 * x * x).exp(),
            Self::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
        }
    }
}

/// Named slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Hands out consecutive regions of the parameter vector.
#[derive(Debug, Default)]
pub struct Allocator {
    pub tensors: Vec<TensorInfo>,
    pub size: usize,
}

impl Allocator {
    pub fn alloc(&mut self, name: String, shape: Vec<usize>) -> usize {
        let offset = self.size;
        let info = TensorInfo { name, shape, offset };
        self.size += info.len();
        self.tensors.push(info);
        offset
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    w: usize,
    b: usize,
}

impl Dense {
    pub fn new(alloc: &mut Allocator, name: &str, n_in: usize, n_out: usize) -> Self {
        let w = alloc.alloc(format!("{name}.weight"), vec![n_out, n_in]);
        let b = alloc.alloc(format!("{name}.bias"), vec![n_out]);
        Self { n_in, n_out, w, b }
    }

    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.w..self.w + self.n_in * self.n_out
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        self.b..self.b + self.n_out
    }

    pub fn fan_in(&self) -> usize {
        self.n_in
    }

    pub fn forward(&self, p: &[f64], x: &[f64], y: &mut [f64]) {
        let w = &p[self.weight_range()];
        let b = &p[self.bias_range()];
        for o in 0..self.n_out {
            let row = &w[o * self.n_in..(o + 1) * self.n_in];
            y[o] = b[o] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
        }
    }

    /// Accumulate parameter gradients into `g` and, if requested, input
    /// gradients into `gx`.
    pub fn backward(&self, p: &[f64], x: &[f64], gy: &[f64], g: &mut [f64], gx: Option<&mut [f64]>) {
        let (wr, br) = (self.weight_range(), self.bias_range());
        {
            let gw = &mut g[wr.clone()];
            for o in 0..self.n_out {
                if gy[o] == 0.0 {
                    continue;
                }
                let row = &mut gw[o * self.n_in..(o + 1) * self.n_in];
                for (r, xi) in row.iter_mut().zip(x) {
                    *r += gy[o] * xi;
                }
            }
        }
        for (gb, go) in g[br].iter_mut().zip(gy) {
            *gb += go;
        }
        if let Some(gx) = gx {
            let w = &p[wr];
            for o in 0..self.n_out {
                if gy[o] == 0.0 {
                    continue;
                }
                let row = &w[o * self.n_in..(o + 1) * self.n_in];
                for (gi, wi) in gx.iter_mut().zip(row) {
                    *gi += gy[o] * wi;
                }
            }
        }
    }
}

/// Strided 1-D convolution with zero padding `k / 2`; activations are laid
/// out channel-major.
#[derive(Debug, Clone)]
pub struct Conv1d {
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
    pub stride: usize,
    pub l_in: usize,
    pub l_out: usize,
    w: usize,
    b: usize,
}

impl Conv1d {
    pub fn new(alloc: &mut Allocator, name: &str, c_in: usize, c_out: usize, kernel: usize, stride: usize, l_in: usize) -> Self {
        let pad = kernel / 2;
        let l_out = (l_in + 2 * pad - kernel) / stride + 1;
        let w = alloc.alloc(format!("{name}.weight"), vec![c_out, c_in, kernel]);
        let b = alloc.alloc(format!("{name}.bias"), vec![c_out]);
        Self { c_in, c_out, kernel, stride, l_in, l_out, w, b }
    }

    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.w..self.w + self.c_out * self.c_in * self.kernel
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        self.b..self.b + self.c_out
    }

    pub fn fan_in(&self) -> usize {
        self.c_in * self.kernel
    }

    pub fn out_len(&self) -> usize {
        self.c_out * self.l_out
    }

    /// Input index feeding output position `t` through tap `j`, if inside.
    #[inline]
    fn src(&self, t: usize, j: usize) -> Option<usize> {
        let pos = (t * self.stride + j) as isize - (self.kernel / 2) as isize;
        (pos >= 0 && (pos as usize) < self.l_in).then_some(pos as usize)
    }

    pub fn forward(&self, p: &[f64], x: &[f64], y: &mut [f64]) {
        let w = &p[self.weight_range()];
        let b = &p[self.bias_range()];
        let k = self.kernel;
        for o in 0..self.c_out {
            for t in 0..self.l_out {
                let mut acc = b[o];
                for j in 0..k {
                    if let Some(s) = self.src(t, j) {
                        for c in 0..self.c_in {
                            acc += w[(o * self.c_in + c) * k + j] * x[c * self.l_in + s];
                        }
                    }
                }
                y[o * self.l_out + t] = acc;
            }
        }
    }

    pub fn backward(&self, p: &[f64], x: &[f64], gy: &[f64], g: &mut [f64], mut gx: Option<&mut [f64]>) {
        let (wr, br) = (self.weight_range(), self.bias_range());
        let k = self.kernel;
        let w = &p[wr.clone()];
        for o in 0..self.c_out {
            let mut gb = 0.0;
            for t in 0..self.l_out {
                let go = gy[o * self.l_out + t];
                if go == 0.0 {
                    continue;
                }
                gb += go;
                for j in 0..k {
                    if let Some(s) = self.src(t, j) {
                        for c in 0..self.c_in {
                            let wi = (o * self.c_in + c) * k + j;
                            g[wr.start + wi] += go * x[c * self.l_in + s];
                            if let Some(gx) = gx.as_deref_mut() {
                                gx[c * self.l_in + s] += go * w[wi];
                            }
                        }
                    }
                }
            }
            g[br.start + o] += gb;
        }
    }
}
