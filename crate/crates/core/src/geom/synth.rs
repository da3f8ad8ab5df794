//! Seeded generator of UIUC-like coordinate files.
//!
//! Sections are built from a CST-style thickness (round nose, closed TE)
//! and a Bernstein mean line, or from the NACA four-digit family, then
//! sampled at a random number of cosine-spaced stations. Used for desk-scale
//! experiments and tests when no airfoil database is at hand.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{naca, write_selig, GeomError, RawAirfoil};
use crate::curves::bernstein;

/// Options for [`generate`].
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub count: usize,
    pub seed: u64,
    /// Range of maximum thickness drawn for each section.
    pub t_max: (f64, f64),
    /// Upper bound of maximum camber.
    pub m_max: f64,
    /// Share of sections written in Lednicer layout.
    pub lednicer_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { count: 400, seed: 7, t_max: (0.05, 0.22), m_max: 0.07, lednicer_share: 0.2 }
    }
}

/// Camber slope cap at the trailing edge (about 17 degrees).
const MAX_TE_SLOPE: f64 = 0.3;

fn bernstein_sum(weights: &[f64], x: f64) -> f64 {
    let n = weights.len() - 1;
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * bernstein(i, n, x).unwrap_or(0.0))
        .sum()
}

fn stations(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()) / 2.0)
        .collect()
}

fn random_section(rng: &mut ChaCha8Rng, cfg: &SynthConfig, idx: usize) -> RawAirfoil {
    let n = rng.random_range(35..=90);
    if rng.random_bool(0.25) {
        let m = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..cfg.m_max.min(0.09)) };
        let p = rng.random_range(0.2..0.6);
        let tc = rng.random_range(cfg.t_max.0..cfg.t_max.1);
        let mut raw = naca::naca4_raw(m, p, tc, n);
        raw.name = format!("SYN{idx:04} {}", raw.name);
        return raw;
    }

    let tw: Vec<f64> = (0..5).map(|_| rng.random_range(0.25..1.0)).collect();
    let xs = stations(n);
    let shape_t: Vec<f64> = xs.iter().map(|&x| x.sqrt() * (1.0 - x) * bernstein_sum(&tw, x)).collect();
    let peak_t = shape_t.iter().copied().fold(0.0, f64::max);
    let t_scale = rng.random_range(cfg.t_max.0..cfg.t_max.1) / peak_t;

    let (shape_c, c_scale) = if rng.random_bool(0.15) {
        (vec![0.0; n], 0.0)
    } else {
        loop {
            let cw: Vec<f64> = (0..4).map(|_| rng.random_range(-0.3..1.0)).collect();
            let shape: Vec<f64> = xs.iter().map(|&x| x * (1.0 - x) * bernstein_sum(&cw, x)).collect();
            let peak = shape.iter().copied().fold(0.0, f64::max);
            if peak > 1e-3 {
                let scale = rng.random_range(0.0..cfg.m_max) / peak;
                // d/dx [x (1 - x) B(x)] = -B(1) = -cw[3] at the trailing edge
                if scale * cw[3].abs() <= MAX_TE_SLOPE {
                    break (shape, scale);
                }
            }
        }
    };

    let upper: Vec<(f64, f64)> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, c_scale * shape_c[i] + 0.5 * t_scale * shape_t[i]))
        .collect();
    let lower: Vec<(f64, f64)> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, c_scale * shape_c[i] - 0.5 * t_scale * shape_t[i]))
        .collect();
    let mut points: Vec<(f64, f64)> = upper.into_iter().rev().collect();
    points.extend(lower.into_iter().skip(1));
    RawAirfoil { name: format!("SYN{idx:04} CST"), points }
}

/// Generate `cfg.count` raw sections deterministically from `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Vec<RawAirfoil> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count).map(|i| random_section(&mut rng, cfg, i)).collect()
}

fn lednicer_text(raw: &RawAirfoil) -> String {
    let le = raw
        .points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let upper: Vec<_> = raw.points[..=le].iter().rev().collect();
    let lower: Vec<_> = raw.points[le..].iter().collect();
    let mut out = format!("{}\n{}. {}.\n\n", raw.name, upper.len(), lower.len());
    for (x, y) in upper {
        out.push_str(&format!("{x:.10} {y:.10}\n"));
    }
    out.push('\n');
    for (x, y) in lower {
        out.push_str(&format!("{x:.10} {y:.10}\n"));
    }
    out
}

/// Write a generated corpus as `.dat` files, mixing Selig and Lednicer
/// layouts. Returns the written file count.
pub fn write_corpus(dir: &Path, cfg: &SynthConfig) -> Result<usize, GeomError> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_f11e);
    let foils = generate(cfg);
    for (i, raw) in foils.iter().enumerate() {
        let text = if rng.random_bool(cfg.lednicer_share) {
            lednicer_text(raw)
        } else {
            write_selig(&raw.name, &raw.points)
        };
        std::fs::write(dir.join(format!("syn{i:04}.dat")), text)?;
    }
    Ok(foils.len())
}

#[cfg(test)]
mod tests {
    use super::super::{decompose, extract_features, parse_coordinate_file, resample_to_section};
    use super::*;

    #[test]
    fn generated_sections_are_feasible_and_varied() {
        let cfg = SynthConfig { count: 60, ..Default::default() };
        let feats: Vec<_> = generate(&cfg)
            .iter()
            .map(|raw| {
                let s = resample_to_section(raw).unwrap();
                assert!(s.min_thickness() > -1e-9);
                extract_features(&decompose(&s))
            })
            .collect();
        let tmin = feats.iter().map(|f| f.t_max).fold(f64::INFINITY, f64::min);
        let tmax = feats.iter().map(|f| f.t_max).fold(0.0, f64::max);
        assert!(tmin < 0.08 && tmax > 0.18);
    }

    #[test]
    fn lednicer_layout_parses_back() {
        let raw = &generate(&SynthConfig { count: 1, ..Default::default() })[0];
        let parsed = parse_coordinate_file(lednicer_text(raw).as_bytes()).unwrap();
        assert_eq!(parsed.points.len(), raw.points.len());
    }
}
