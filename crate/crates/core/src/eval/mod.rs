//! Comparison metrics across parameterizations: inverse fitting and its
//! error distribution, feasibility ratio, maximum-correlation tables, and
//! the latent-space exports of a trained generator.

mod generation;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use generation::{constrained_generate, latent_traversal, write_traversal_csv, TraversalStep};

use crate::aso::{ga_maximize_seeded, trial_seed, AsoError, GaConfig};
use crate::geom::{decompose, extract_features, AirfoilSection, Feature, FEASIBILITY_TOL, R_LE_FLOOR};
use crate::io::{write_csv_rows, write_csv_table};
use crate::param::{scale_to_bounds, DesignVector, Parameterization};
use crate::stats::pearson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub target: usize,
    pub best: DesignVector,
    pub mse: f64,
    pub generations: usize,
    pub max_generations: usize,
}

/// Minimize the per-point MSE between decoded and target sections with the
/// genetic algorithm. The box center seeds the initial population; failed
/// decodes get the worst fitness.
pub fn inverse_fit(
    param: &dyn Parameterization,
    target: &AirfoilSection,
    target_index: usize,
    cfg: &GaConfig,
) -> Result<FitResult, AsoError> {
    let bounds = param.bounds();
    let center: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let history = ga_maximize_seeded(
        &bounds,
        cfg,
        &[center],
        |x| {
            let s = param.decode(&DesignVector::new(x.to_vec())).ok()?;
            Some(-s.mse(target))
        },
        |_| {},
    )?;
    Ok(FitResult {
        target: target_index,
        best: DesignVector::new(history.best_x.clone()),
        mse: -history.best_objective,
        generations: history.generations(),
        max_generations: cfg.generations,
    })
}

/// Fit every target with its own seed derived from `cfg.seed`; targets are
/// spread over `jobs` threads.
pub fn inverse_fit_all(
    param: &dyn Parameterization,
    targets: &[AirfoilSection],
    cfg: &GaConfig,
    jobs: usize,
) -> Vec<Result<FitResult, AsoError>> {
    let run = |i: usize| {
        let c = GaConfig { seed: trial_seed(cfg.seed, i), jobs: 1, ..cfg.clone() };
        inverse_fit(param, &targets[i], i, &c)
    };
    let jobs = jobs.max(1).min(targets.len().max(1));
    if jobs == 1 {
        return (0..targets.len()).map(run).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut out: Vec<Option<Result<FitResult, AsoError>>> = (0..targets.len()).map(|_| None).collect();
    let parts: Vec<Vec<(usize, Result<FitResult, AsoError>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= targets.len() {
                            break local;
                        }
                        local.push((i, run(i)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("fit worker panicked")).collect()
    });
    for (i, r) in parts.into_iter().flatten() {
        out[i] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every target fitted")).collect()
}

/// Empirical CDF (percent of values `<=` each grid point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    pub grid: Vec<f64>,
    pub percent: Vec<f64>,
}

/// Log-spaced grid over whole decades covering the positive values.
pub fn log_grid(values: &[f64], n_points: usize) -> Vec<f64> {
    let pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pos.iter().copied().fold(0.0, f64::max);
    let (mut a, mut b) = if pos.is_empty() { (-12.0, 0.0) } else { (lo.log10().floor(), hi.log10().ceil()) };
    if a == b {
        a -= 1.0;
        b += 1.0;
    }
    let n = n_points.max(2);
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> CdfCurve {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    let percent = grid.iter().map(|g| 100.0 * sorted.partition_point(|v| v <= g) as f64 / n).collect();
    CdfCurve { grid: grid.to_vec(), percent }
}

pub fn cumulative_mse_curve(results: &[FitResult]) -> CdfCurve {
    let mses: Vec<f64> = results.iter().map(|r| r.mse).collect();
    empirical_cdf(&mses, &log_grid(&mses, 201))
}

/// `mse, <method>...` with one CDF column per method on a shared grid.
pub fn write_cdf_csv(path: &Path, methods: &[(String, Vec<f64>)], n_points: usize) -> std::io::Result<()> {
    let all: Vec<f64> = methods.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let grid = log_grid(&all, n_points);
    let curves: Vec<CdfCurve> = methods.iter().map(|(_, v)| empirical_cdf(v, &grid)).collect();
    let mut header = vec!["mse"];
    header.extend(methods.iter().map(|(m, _)| m.as_str()));
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, g)| std::iter::once(*g).chain(curves.iter().map(|c| c.percent[i])).collect())
        .collect();
    write_csv_table(path, &header, &rows)
}

/// Uniform samples in the parameterization's box.
fn sample_designs<R: Rng>(param: &dyn Parameterization, n: usize, rng: &mut R) -> Vec<DesignVector> {
    let bounds = param.bounds();
    (0..n)
        .map(|_| {
            let unit: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
            scale_to_bounds(&unit, &bounds)
        })
        .collect()
}

/// Percentage of uniform box samples that decode to a non-intersecting
/// section.
pub fn feasibility_ratio<R: Rng>(param: &dyn Parameterization, n_samples: usize, rng: &mut R) -> f64 {
    if n_samples == 0 {
        return 0.0;
    }
    let ok = sample_designs(param, n_samples, rng)
        .iter()
        .filter(|dv| param.decode(dv).is_ok_and(|s| s.is_feasible(FEASIBILITY_TOL)))
        .count();
    100.0 * ok as f64 / n_samples as f64
}

/// Largest |Pearson r| between each feature and any design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaxResult {
    /// `None` when the feature (or every design variable) has zero variance.
    pub values: [Option<f64>; 4],
    pub argmax: [Option<usize>; 4],
    pub samples: usize,
}

/// Feature value used for correlation: the LE radius enters as log10.
pub fn correlation_feature(f: Feature, value: f64) -> f64 {
    if f == Feature::LeRadius {
        value.max(R_LE_FLOOR).log10()
    } else {
        value
    }
}

pub fn cmax_table<R: Rng>(param: &dyn Parameterization, n_samples: usize, rng: &mut R) -> CmaxResult {
    let mut dvs: Vec<Vec<f64>> = Vec::new();
    let mut feats: Vec<[f64; 4]> = Vec::new();
    for dv in sample_designs(param, n_samples, rng) {
        let Ok(s) = param.decode(&dv) else { continue };
        if s.y_upper.iter().chain(&s.y_lower).any(|v| !v.is_finite()) {
            continue;
        }
        let f = extract_features(&decompose(&s)).as_array();
        feats.push(Feature::ALL.map(|k| correlation_feature(k, f[k.index()])));
        dvs.push(dv.values);
    }
    cmax_from_samples(&dvs, &feats)
}

pub fn cmax_from_samples(dvs: &[Vec<f64>], feats: &[[f64; 4]]) -> CmaxResult {
    let n_dv = dvs.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..n_dv).map(|j| dvs.iter().map(|d| d[j]).collect()).collect();
    let mut values = [None; 4];
    let mut argmax = [None; 4];
    for f in Feature::ALL {
        let fc: Vec<f64> = feats.iter().map(|v| v[f.index()]).collect();
        for (j, col) in cols.iter().enumerate() {
            if let Some(r) = pearson(col, &fc) {
                if values[f.index()].is_none_or(|best: f64| r.abs() > best) {
                    values[f.index()] = Some(r.abs());
                    argmax[f.index()] = Some(j);
                }
            }
        }
    }
    CmaxResult { values, argmax, samples: dvs.len() }
}

/// One row of the comparison tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub method: String,
    pub n_dv: usize,
    pub feasibility_percent: Option<f64>,
    pub cmax: Option<CmaxResult>,
    /// 10th, 50th and 90th percentile of inverse-fit MSE.
    pub mse_percentiles: Option<[f64; 3]>,
}

#[derive(Serialize)]
struct FeasibilityRow<'a> {
    method: &'a str,
    n_dv: usize,
    feasible_percent: Option<f64>,
}

#[derive(Serialize)]
struct CmaxRow<'a> {
    method: &'a str,
    n_dv: usize,
    m_max: Option<f64>,
    gamma_te: Option<f64>,
    t_max: Option<f64>,
    log_r_le: Option<f64>,
}

pub fn write_feasibility_csv(path: &Path, rows: &[MetricTable]) -> std::io::Result<()> {
    let rows: Vec<FeasibilityRow> = rows
        .iter()
        .map(|r| FeasibilityRow { method: &r.method, n_dv: r.n_dv, feasible_percent: r.feasibility_percent })
        .collect();
    write_csv_rows(path, &rows)
}

pub fn write_cmax_csv(path: &Path, rows: &[MetricTable]) -> std::io::Result<()> {
    let rows: Vec<CmaxRow> = rows
        .iter()
        .map(|r| {
            let v = r.cmax.as_ref().map_or([None; 4], |c| c.values);
            CmaxRow { method: &r.method, n_dv: r.n_dv, m_max: v[0], gamma_te: v[1], t_max: v[2], log_r_le: v[3] }
        })
        .collect();
    write_csv_rows(path, &rows)
}
