//! Real-coded genetic algorithm: binary tournament, simulated binary
//! crossover, polynomial mutation and elitism.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AsoError;

/// Fitness assigned to individuals that fail to decode, violate a
/// constraint or whose evaluation does not converge.
pub const DEATH_PENALTY: f64 = -1e6;

/// Consecutive generations with no successful evaluation before giving up.
pub const MAX_FAILED_GENERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    /// Generation cap, counting the initial population as the first.
    pub generations: usize,
    pub crossover_rate: f64,
    pub crossover_eta: f64,
    /// Per-variable mutation probability; `None` means `1 / n_dv`.
    pub mutation_rate: Option<f64>,
    pub mutation_eta: f64,
    pub tournament: usize,
    pub elitism: usize,
    pub seed: u64,
    /// Stop once the best value improved by less than `stall_tolerance`
    /// over this many generations.
    pub stall_generations: Option<usize>,
    pub stall_tolerance: f64,
    /// Worker threads used for evaluating a population.
    pub jobs: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 100,
            crossover_rate: 0.9,
            crossover_eta: 15.0,
            mutation_rate: None,
            mutation_eta: 20.0,
            tournament: 2,
            elitism: 1,
            seed: 0,
            stall_generations: None,
            stall_tolerance: 1e-9,
            jobs: 1,
        }
    }
}

impl GaConfig {
    /// Budget used for inverse fitting: population 200, stall window of
    /// 200 generations at 1e-9, capped at `max_generations`.
    pub fn inverse_fit(max_generations: usize, seed: u64) -> Self {
        Self {
            population: 200,
            generations: max_generations,
            stall_generations: Some(200),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AsoError> {
        let bad = |m: &str| Err(AsoError::InvalidConfig(m.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.generations == 0 {
            return bad("generations must be positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must lie in [0, 1]");
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation rate must lie in [0, 1]");
            }
        }
        if self.crossover_eta < 0.0 || self.mutation_eta < 0.0 {
            return bad("distribution indices must be non-negative");
        }
        if self.tournament == 0 || self.tournament > self.population {
            return bad("tournament size must lie in [1, population]");
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population");
        }
        if self.stall_generations == Some(0) {
            return bad("stall window must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub seed: u64,
    /// Best-so-far objective after each generation.
    pub best: Vec<f64>,
    /// Mean objective over the non-penalized individuals of each
    /// generation (NaN when every individual was penalized).
    pub mean: Vec<f64>,
    /// Penalized individuals per generation.
    pub rejected: Vec<usize>,
    pub evaluated: Vec<usize>,
    pub best_x: Vec<f64>,
    pub best_objective: f64,
}

impl RunHistory {
    pub fn generations(&self) -> usize {
        self.best.len()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluated.iter().sum()
    }

    pub fn rejections(&self) -> usize {
        self.rejected.iter().sum()
    }
}

/// A population snapshot handed to observers after each generation.
pub struct Generation<'a> {
    pub index: usize,
    pub individuals: &'a [Vec<f64>],
    pub fitness: &'a [f64],
}

/// Maximize `objective` inside `bounds`. `None` or non-finite objective
/// values receive [`DEATH_PENALTY`].
pub fn ga_maximize<F>(bounds: &[(f64, f64)], cfg: &GaConfig, objective: F) -> Result<RunHistory, AsoError>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    ga_maximize_observed(bounds, cfg, objective, |_| {})
}

pub fn ga_maximize_observed<F, O>(
    bounds: &[(f64, f64)],
    cfg: &GaConfig,
    objective: F,
    observer: O,
) -> Result<RunHistory, AsoError>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
    O: FnMut(&Generation<'_>),
{
    ga_maximize_seeded(bounds, cfg, &[], objective, observer)
}

/// As [`ga_maximize_observed`], with `initial` designs (clamped into the
/// box) replacing the first random members of the starting population.
pub fn ga_maximize_seeded<F, O>(
    bounds: &[(f64, f64)],
    cfg: &GaConfig,
    initial: &[Vec<f64>],
    objective: F,
    mut observer: O,
) -> Result<RunHistory, AsoError>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
    O: FnMut(&Generation<'_>),
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(AsoError::InvalidConfig("empty design space".into()));
    }
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(AsoError::InvalidConfig(format!("bad bounds for variable {i}: [{lo}, {hi}]")));
        }
    }
    let n = bounds.len();
    let pm = cfg.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect())
        .collect();
    for (slot, x) in pop.iter_mut().zip(initial) {
        if x.len() != n {
            return Err(AsoError::InvalidConfig(format!("initial design has {} variables, expected {n}", x.len())));
        }
        *slot = x.iter().zip(bounds).map(|(v, &(lo, hi))| v.clamp(lo, hi)).collect();
    }
    let mut fit = evaluate_all(&pop, &objective, cfg.jobs);

    let mut history = RunHistory {
        seed: cfg.seed,
        best: Vec::new(),
        mean: Vec::new(),
        rejected: Vec::new(),
        evaluated: Vec::new(),
        best_x: Vec::new(),
        best_objective: f64::NEG_INFINITY,
    };
    let mut failed_streak = 0;
    let mut n_new = pop.len();

    for gen in 0..cfg.generations {
        if gen > 0 {
            let order = ranking(&fit);
            let mut next: Vec<Vec<f64>> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
            let mut next_fit: Vec<f64> = order[..cfg.elitism].iter().map(|&i| fit[i]).collect();
            let mut children = Vec::with_capacity(cfg.population);
            while next.len() + children.len() < cfg.population {
                let a = tournament(&fit, cfg.tournament, &mut rng);
                let b = tournament(&fit, cfg.tournament, &mut rng);
                let (mut c1, mut c2) = (pop[a].clone(), pop[b].clone());
                if rng.random::<f64>() < cfg.crossover_rate {
                    sbx(&mut c1, &mut c2, bounds, cfg.crossover_eta, &mut rng);
                }
                polynomial_mutation(&mut c1, bounds, cfg.mutation_eta, pm, &mut rng);
                polynomial_mutation(&mut c2, bounds, cfg.mutation_eta, pm, &mut rng);
                children.push(c1);
                if next.len() + children.len() < cfg.population {
                    children.push(c2);
                }
            }
            let child_fit = evaluate_all(&children, &objective, cfg.jobs);
            n_new = children.len();
            next.extend(children);
            next_fit.extend(child_fit);
            pop = next;
            fit = next_fit;
        }

        let ok: Vec<f64> = fit.iter().copied().filter(|&f| f > DEATH_PENALTY).collect();
        let rejected = fit.len() - ok.len();
        let (ib, fb) = fit.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, f)| {
            if f > acc.1 {
                (i, f)
            } else {
                acc
            }
        });
        if fb > history.best_objective || history.best_x.is_empty() {
            history.best_objective = fb;
            history.best_x = pop[ib].clone();
        }
        history.best.push(history.best_objective);
        history.mean.push(if ok.is_empty() { f64::NAN } else { ok.iter().sum::<f64>() / ok.len() as f64 });
        history.rejected.push(rejected);
        history.evaluated.push(n_new);
        observer(&Generation { index: gen, individuals: &pop, fitness: &fit });

        if ok.is_empty() {
            failed_streak += 1;
            if failed_streak >= MAX_FAILED_GENERATIONS {
                return Err(AsoError::EvaluatorFailure { generations: failed_streak });
            }
        } else {
            failed_streak = 0;
        }
        if let Some(window) = cfg.stall_generations {
            let g = history.best.len();
            if g > window && history.best[g - 1] - history.best[g - 1 - window] < cfg.stall_tolerance {
                break;
            }
        }
    }
    Ok(history)
}

fn evaluate_all<F>(pop: &[Vec<f64>], objective: &F, jobs: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let score = |x: &Vec<f64>| match objective(x) {
        Some(v) if v.is_finite() => v.max(DEATH_PENALTY),
        _ => DEATH_PENALTY,
    };
    let jobs = jobs.max(1).min(pop.len());
    if jobs <= 1 {
        return pop.iter().map(score).collect();
    }
    let next = AtomicUsize::new(0);
    let mut out = vec![DEATH_PENALTY; pop.len()];
    let results: Vec<Vec<(usize, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= pop.len() {
                            break local;
                        }
                        local.push((i, score(&pop[i])));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    for (i, f) in results.into_iter().flatten() {
        out[i] = f;
    }
    out
}

/// Indices sorted by descending fitness; ties keep population order.
fn ranking(fit: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fit.len()).collect();
    idx.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]));
    idx
}

fn tournament<R: Rng>(fit: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] > fit[best] {
            best = c;
        }
    }
    best
}

/// Bounded simulated binary crossover, applied per variable with
/// probability 1/2.
fn sbx<R: Rng>(a: &mut [f64], b: &mut [f64], bounds: &[(f64, f64)], eta: f64, rng: &mut R) {
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if rng.random::<f64>() > 0.5 || (a[i] - b[i]).abs() < 1e-14 || hi <= lo {
            continue;
        }
        let (y1, y2) = if a[i] < b[i] { (a[i], b[i]) } else { (b[i], a[i]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let d = y2 - y1;
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / d);
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / d);
        let c1 = (0.5 * ((y1 + y2) - bq1 * d)).clamp(lo, hi);
        let c2 = (0.5 * ((y1 + y2) + bq2 * d)).clamp(lo, hi);
        if rng.random::<bool>() {
            a[i] = c2;
            b[i] = c1;
        } else {
            a[i] = c1;
            b[i] = c2;
        }
    }
}

fn polynomial_mutation<R: Rng>(x: &mut [f64], bounds: &[(f64, f64)], eta: f64, rate: f64, rng: &mut R) {
    let p = 1.0 / (eta + 1.0);
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        if hi <= lo || rng.random::<f64>() >= rate {
            continue;
        }
        let span = hi - lo;
        let d1 = (*xi - lo) / span;
        let d2 = (hi - *xi) / span;
        let r: f64 = rng.random();
        let dq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
            v.powf(p) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(p)
        };
        *xi = (*xi + dq * span).clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> Option<f64> {
        Some(-x.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn sphere_smoke() {
        let cfg = GaConfig { population: 20, generations: 50, seed: 3, ..GaConfig::default() };
        let h = ga_maximize(&[(-1.0, 1.0); 3], &cfg, sphere).unwrap();
        assert!(-h.best_objective < 1e-3, "best {}", -h.best_objective);
        assert_eq!(h.generations(), 50);
    }

    #[test]
    fn best_so_far_is_monotone() {
        let cfg = GaConfig { population: 10, generations: 40, seed: 9, ..GaConfig::default() };
        let h = ga_maximize(&[(-5.0, 5.0); 4], &cfg, |x| Some((x[0] * 3.0).sin() - x[1].abs())).unwrap();
        assert!(h.best.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*h.best.last().unwrap(), h.best_objective);
    }

    #[test]
    fn individuals_stay_in_bounds() {
        let bounds = [(0.0, 1.0), (-2.0, -1.0), (5.0, 5.0)];
        let cfg = GaConfig { population: 12, generations: 30, seed: 1, ..GaConfig::default() };
        let mut seen = 0;
        ga_maximize_observed(&bounds, &cfg, sphere, |g| {
            for x in g.individuals {
                for (v, (lo, hi)) in x.iter().zip(&bounds) {
                    assert!(v >= lo && v <= hi);
                }
            }
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 30);
    }

    #[test]
    fn deterministic_for_seed_and_jobs() {
        let base = GaConfig { population: 16, generations: 20, seed: 5, ..GaConfig::default() };
        let a = ga_maximize(&[(-1.0, 1.0); 5], &base, sphere).unwrap();
        let b = ga_maximize(&[(-1.0, 1.0); 5], &GaConfig { jobs: 3, ..base.clone() }, sphere).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stall_rule_stops_early() {
        let cfg = GaConfig {
            population: 10,
            generations: 500,
            stall_generations: Some(20),
            seed: 2,
            ..GaConfig::default()
        };
        let h = ga_maximize(&[(-1.0, 1.0); 2], &cfg, |_| Some(1.0)).unwrap();
        assert_eq!(h.generations(), 21);
    }

    #[test]
    fn total_failure_is_reported() {
        let cfg = GaConfig { population: 6, generations: 10, ..GaConfig::default() };
        let err = ga_maximize(&[(0.0, 1.0)], &cfg, |_| None).unwrap_err();
        assert!(matches!(err, AsoError::EvaluatorFailure { generations: 3 }));
    }

    #[test]
    fn penalties_are_counted() {
        let cfg = GaConfig { population: 20, generations: 5, seed: 4, ..GaConfig::default() };
        let h = ga_maximize(&[(0.0, 1.0)], &cfg, |x| (x[0] < 0.5).then_some(x[0])).unwrap();
        assert!(h.rejections() > 0);
        assert!(h.best_objective < 0.5);
        assert_eq!(h.evaluations(), 20 + 4 * 19);
    }

    #[test]
    fn seeded_individual_is_never_lost() {
        let cfg = GaConfig { population: 10, generations: 3, seed: 8, ..GaConfig::default() };
        let target = vec![0.123, -0.456];
        let f = |x: &[f64]| Some(-((x[0] - 0.123).powi(2) + (x[1] + 0.456).powi(2)));
        let h = ga_maximize_seeded(&[(-1.0, 1.0); 2], &cfg, &[target.clone()], f, |_| {}).unwrap();
        assert_eq!(h.best_objective, 0.0);
        assert_eq!(h.best_x, target);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            GaConfig { population: 1, ..GaConfig::default() },
            GaConfig { crossover_rate: 1.5, ..GaConfig::default() },
            GaConfig { mutation_rate: Some(-0.1), ..GaConfig::default() },
            GaConfig { elitism: 100, ..GaConfig::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
