//! The benchmark problems: maximize Cl/Cd subject to a non-intersecting
//! geometry and, optionally, thickness/camber/LE-radius limits.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::ga::{ga_maximize_observed, GaConfig, Generation, RunHistory, DEATH_PENALTY};
use super::xfoil::{AeroEvaluator, XfoilCase};
use super::AsoError;
use crate::geom::{decompose, extract_features, AirfoilSection, Feature, GeometricFeatures, FEASIBILITY_TOL};
use crate::param::{DesignVector, Parameterization};
use crate::vae::AirfoilGenerator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeRadiusDirection {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSet {
    /// `m_max < value`.
    pub m_max_below: Option<f64>,
    /// `lo < t_max < hi`.
    pub t_max_range: Option<(f64, f64)>,
    pub r_le_limit: Option<f64>,
    pub r_le_direction: LeRadiusDirection,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self { m_max_below: None, t_max_range: None, r_le_limit: None, r_le_direction: LeRadiusDirection::Below }
    }
}

impl ConstraintSet {
    /// Only the geometric non-intersection requirement.
    pub fn none() -> Self {
        Self::default()
    }

    /// `m_max < 0.03`, `0.1 < t_max < 0.12` and the LE radius compared with
    /// 0.005 in the given direction.
    pub fn benchmark(direction: LeRadiusDirection) -> Self {
        Self {
            m_max_below: Some(0.03),
            t_max_range: Some((0.1, 0.12)),
            r_le_limit: Some(0.005),
            r_le_direction: direction,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.m_max_below.is_none() && self.t_max_range.is_none() && self.r_le_limit.is_none()
    }

    pub fn validate(&self) -> Result<(), AsoError> {
        let finite = self.m_max_below.is_none_or(f64::is_finite)
            && self.t_max_range.is_none_or(|(a, b)| a.is_finite() && b.is_finite())
            && self.r_le_limit.is_none_or(f64::is_finite);
        if !finite {
            return Err(AsoError::InvalidConfig("constraint bounds must be finite".into()));
        }
        Ok(())
    }

    /// Physical interval `(lo, hi)` imposed on a feature, if any.
    pub fn interval(&self, f: Feature) -> Option<(f64, f64)> {
        match f {
            Feature::MaxCamber => self.m_max_below.map(|v| (f64::NEG_INFINITY, v)),
            Feature::MaxThickness => self.t_max_range,
            Feature::LeRadius => self.r_le_limit.map(|v| match self.r_le_direction {
                LeRadiusDirection::Below => (f64::NEG_INFINITY, v),
                LeRadiusDirection::Above => (v, f64::INFINITY),
            }),
            Feature::TeAngle => None,
        }
    }

    pub fn flags(&self, section: &AirfoilSection) -> ConstraintFlags {
        if section.y_upper.iter().chain(&section.y_lower).any(|v| !v.is_finite()) {
            return ConstraintFlags::failed();
        }
        let feats = extract_features(&decompose(section));
        self.flags_with(section.is_feasible(FEASIBILITY_TOL), &feats)
    }

    pub fn flags_with(&self, t_min: bool, feats: &GeometricFeatures) -> ConstraintFlags {
        let inside = |f: Feature| {
            self.interval(f).is_none_or(|(lo, hi)| {
                let v = feats.get(f);
                v > lo && v < hi
            })
        };
        ConstraintFlags {
            t_min,
            t_max: inside(Feature::MaxThickness),
            m_max: inside(Feature::MaxCamber),
            r_le: inside(Feature::LeRadius),
        }
    }
}

/// Per-constraint pass/fail of one design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFlags {
    pub t_min: bool,
    pub t_max: bool,
    pub m_max: bool,
    pub r_le: bool,
}

impl ConstraintFlags {
    pub fn failed() -> Self {
        Self { t_min: false, t_max: false, m_max: false, r_le: false }
    }

    pub fn all(&self) -> bool {
        self.t_min && self.t_max && self.m_max && self.r_le
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub name: String,
    pub constraints: ConstraintSet,
    pub case: XfoilCase,
}

impl OptimizationProblem {
    pub fn unconstrained() -> Self {
        Self { name: "unconstrained".into(), constraints: ConstraintSet::none(), case: XfoilCase::default() }
    }

    pub fn constrained(direction: LeRadiusDirection) -> Self {
        Self {
            name: "constrained".into(),
            constraints: ConstraintSet::benchmark(direction),
            case: XfoilCase::default(),
        }
    }
}

/// The search box after constraint handling and which features are
/// enforced by it; everything else is checked after decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedDomain {
    pub bounds: Vec<(f64, f64)>,
    pub box_features: Vec<Feature>,
    pub post_hoc: bool,
}

/// For a generator, tighten the physical latent bounds to the normalized
/// images of the constraint intervals. Other parameterizations keep their
/// box and are checked feature by feature after decoding.
pub fn impose_constraints(
    constraints: &ConstraintSet,
    param: &dyn Parameterization,
    generator: Option<&AirfoilGenerator>,
) -> Result<ConstrainedDomain, AsoError> {
    constraints.validate()?;
    let mut bounds = param.bounds();
    let Some(gen) = generator else {
        return Ok(ConstrainedDomain { bounds, box_features: Vec::new(), post_hoc: !constraints.is_empty() });
    };
    let normalizer = gen.model.normalizer.as_ref().ok_or_else(|| {
        AsoError::InvalidConfig("generator has no feature normalizer; constraints cannot be mapped".into())
    })?;
    let mut box_features = Vec::new();
    for f in Feature::ALL {
        let Some((lo, hi)) = constraints.interval(f) else { continue };
        if lo >= hi || (f == Feature::LeRadius && hi <= 0.0) || (f == Feature::MaxThickness && hi <= 0.0) {
            return Err(AsoError::InfeasibleBox(format!("{} interval ({lo}, {hi}) is empty", f.name())));
        }
        let map = |v: f64| if v.is_finite() { normalizer.normalize_value(f, v) } else { v };
        let k = gen.model.config.phys_index(f);
        let (blo, bhi) = bounds[k];
        let (nlo, nhi) = (map(lo).max(blo), map(hi).min(bhi));
        if nlo >= nhi {
            return Err(AsoError::InfeasibleBox(format!(
                "{} interval ({lo}, {hi}) lies outside the latent box [{blo:.4}, {bhi:.4}]",
                f.name()
            )));
        }
        bounds[k] = (nlo, nhi);
        box_features.push(f);
    }
    Ok(ConstrainedDomain { bounds, box_features, post_hoc: false })
}

/// Rejection counters collected while a problem is being optimized.
#[derive(Debug, Default)]
pub struct RejectionLog {
    pub decode: AtomicUsize,
    pub geometry: AtomicUsize,
    pub constraint: AtomicUsize,
    pub solver: AtomicUsize,
    pub evaluated: AtomicUsize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub decode: usize,
    pub geometry: usize,
    pub constraint: usize,
    pub solver: usize,
    pub evaluated: usize,
}

impl RejectionLog {
    pub fn counts(&self) -> RejectionCounts {
        RejectionCounts {
            decode: self.decode.load(Ordering::Relaxed),
            geometry: self.geometry.load(Ordering::Relaxed),
            constraint: self.constraint.load(Ordering::Relaxed),
            solver: self.solver.load(Ordering::Relaxed),
            evaluated: self.evaluated.load(Ordering::Relaxed),
        }
    }
}

/// Objective `Cl/Cd`, `None` (death penalty) on any failure or violation.
pub fn objective(
    problem: &OptimizationProblem,
    domain: &ConstrainedDomain,
    param: &dyn Parameterization,
    aero: &dyn AeroEvaluator,
    log: &RejectionLog,
    x: &[f64],
) -> Option<f64> {
    log.evaluated.fetch_add(1, Ordering::Relaxed);
    let bump = |c: &AtomicUsize| {
        c.fetch_add(1, Ordering::Relaxed);
        None
    };
    let Ok(section) = param.decode(&DesignVector::new(x.to_vec())) else { return bump(&log.decode) };
    if !section.is_feasible(FEASIBILITY_TOL) {
        return bump(&log.geometry);
    }
    if domain.post_hoc && !problem.constraints.flags(&section).all() {
        return bump(&log.constraint);
    }
    match aero.evaluate(&section) {
        Ok(r) => r.lift_to_drag().or_else(|| bump(&log.solver)),
        Err(_) => bump(&log.solver),
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationRun {
    pub history: RunHistory,
    pub best: DesignVector,
    pub best_section: Option<AirfoilSection>,
    pub rejections: RejectionCounts,
}

pub fn ga_optimize(
    problem: &OptimizationProblem,
    param: &dyn Parameterization,
    generator: Option<&AirfoilGenerator>,
    aero: &dyn AeroEvaluator,
    cfg: &GaConfig,
) -> Result<OptimizationRun, AsoError> {
    ga_optimize_observed(problem, param, generator, aero, cfg, |_| {})
}

pub fn ga_optimize_observed<O: FnMut(&Generation<'_>)>(
    problem: &OptimizationProblem,
    param: &dyn Parameterization,
    generator: Option<&AirfoilGenerator>,
    aero: &dyn AeroEvaluator,
    cfg: &GaConfig,
    observer: O,
) -> Result<OptimizationRun, AsoError> {
    problem.case.validate()?;
    let domain = impose_constraints(&problem.constraints, param, generator)?;
    let log = RejectionLog::default();
    let history =
        ga_maximize_observed(&domain.bounds, cfg, |x| objective(problem, &domain, param, aero, &log, x), observer)?;
    let best = DesignVector::new(history.best_x.clone());
    // A penalized best means nothing admissible was found.
    let best_section = (history.best_objective > DEATH_PENALTY).then(|| param.decode(&best).ok()).flatten();
    Ok(OptimizationRun { history, best, best_section, rejections: log.counts() })
}

/// Per-generation statistics over repeated independent trials.
#[derive(Debug, Clone)]
pub struct TrialStatistics {
    pub runs: Vec<Result<OptimizationRun, String>>,
    pub seeds: Vec<u64>,
    pub mean: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Index of the successful trial whose final best is closest to the
    /// mean final best.
    pub representative: Option<usize>,
}

/// Seed of trial `i` derived from a master seed.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    let mut z = master.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn repeated_trials(
    problem: &OptimizationProblem,
    param: &dyn Parameterization,
    generator: Option<&AirfoilGenerator>,
    aero: &dyn AeroEvaluator,
    cfg: &GaConfig,
    n_trials: usize,
) -> Result<TrialStatistics, AsoError> {
    if n_trials == 0 {
        return Err(AsoError::InvalidConfig("at least one trial is required".into()));
    }
    // Setup errors are shared by every trial; report them once.
    problem.case.validate()?;
    impose_constraints(&problem.constraints, param, generator)?;
    let mut runs = Vec::with_capacity(n_trials);
    let mut seeds = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let seed = trial_seed(cfg.seed, i);
        seeds.push(seed);
        let run = ga_optimize(problem, param, generator, aero, &GaConfig { seed, ..cfg.clone() });
        if let Err(e) = &run {
            log::warn!("trial {i} failed: {e}");
        }
        runs.push(run.map_err(|e| e.to_string()));
    }
    let curves: Vec<&[f64]> = runs.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.history.best.as_slice()).collect();
    let (mean, sigma) = band(&curves);
    let representative = runs
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|r| (i, r.history.best_objective)))
        .min_by(|a, b| {
            let fm = mean.last().copied().unwrap_or(0.0);
            (a.1 - fm).abs().total_cmp(&(b.1 - fm).abs())
        })
        .map(|(i, _)| i);
    Ok(TrialStatistics { runs, seeds, mean, sigma, representative })
}

/// Pointwise mean and population standard deviation; shorter curves are
/// extended with their final value.
pub fn band(curves: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    let at = |c: &[f64], g: usize| c[g.min(c.len() - 1)];
    let mut mean = Vec::with_capacity(len);
    let mut sigma = Vec::with_capacity(len);
    for g in 0..len {
        let vals: Vec<f64> = curves.iter().filter(|c| !c.is_empty()).map(|c| at(c, g)).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / vals.len() as f64;
        mean.push(m);
        sigma.push(v.sqrt());
    }
    (mean, sigma)
}

/// Convergence-history table: `generation, mean, lower, upper,
/// representative, trial_0, ...`.
pub fn write_history_csv(path: &std::path::Path, stats: &TrialStatistics) -> std::io::Result<()> {
    let trials: Vec<Option<&[f64]>> =
        stats.runs.iter().map(|r| r.as_ref().ok().map(|r| r.history.best.as_slice())).collect();
    let mut header = vec!["generation".to_string(), "mean".into(), "lower".into(), "upper".into(), "representative".into()];
    header.extend((0..trials.len()).map(|i| format!("trial_{i}")));
    let pick = |c: Option<&[f64]>, g: usize| c.filter(|c| !c.is_empty()).map_or(f64::NAN, |c| c[g.min(c.len() - 1)]);
    let rows: Vec<Vec<f64>> = (0..stats.mean.len())
        .map(|g| {
            let rep = stats.representative.map_or(f64::NAN, |i| pick(trials[i], g));
            let mut row = vec![(g + 1) as f64, stats.mean[g], stats.mean[g] - stats.sigma[g], stats.mean[g] + stats.sigma[g], rep];
            row.extend(trials.iter().map(|c| pick(*c, g)));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    crate::io::write_csv_table(path, &header, &rows)
}

/// Random designs in the parameterization's box, normalized to [0, 1] per
/// variable, with per-constraint flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelSample {
    pub unit: Vec<f64>,
    pub flags: ConstraintFlags,
}

pub fn parallel_coordinates_export<R: rand::Rng>(
    param: &dyn Parameterization,
    n_samples: usize,
    constraints: &ConstraintSet,
    rng: &mut R,
) -> Vec<ParallelSample> {
    let bounds = param.bounds();
    (0..n_samples)
        .map(|_| {
            let unit: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
            let dv = crate::param::scale_to_bounds(&unit, &bounds);
            let flags = param.decode(&dv).map_or(ConstraintFlags::failed(), |s| constraints.flags(&s));
            ParallelSample { unit, flags }
        })
        .collect()
}

pub fn write_parallel_csv(path: &std::path::Path, samples: &[ParallelSample]) -> std::io::Result<()> {
    let n = samples.first().map_or(0, |s| s.unit.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..n).map(|i| format!("dv_{i}")).collect();
    header.extend(["t_min", "t_max", "m_max", "r_le"].map(String::from));
    w.write_record(&header).map_err(std::io::Error::other)?;
    for s in samples {
        let f = s.flags;
        let mut row: Vec<String> = s.unit.iter().map(|v| format!("{v:.10e}")).collect();
        row.extend([f.t_min, f.t_max, f.m_max, f.r_le].map(|b| u8::from(b).to_string()));
        w.write_record(&row).map_err(std::io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    crate::io::atomic_write(path, &bytes)
}
