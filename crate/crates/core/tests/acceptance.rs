//! Acceptance report: one PASS/FAIL/BLOCKED line per criterion.
//!
//! Exact criteria (feasibility, curve math, feature oracles, gradients) make
//! the process exit non-zero when they fail. Desk-scale reproduction
//! criteria are reported without failing the build; their status lines are
//! the record.
//!
//! Environment:
//! * `AG_UIUC_DIR` — directory of UIUC coordinate files; without it the
//!   trainings use a seeded synthetic corpus and the dataset-count
//!   criterion is blocked.
//! * `AIRGEN_XFOIL` (or `xfoil` on `PATH`) — enables the solver smoke run.
//! * `AG_ACCEPT_TARGETS` — inverse-fitting targets (default 5).
//! * `AG_ACCEPT_SAMPLES` — synthetic corpus size (default 300).

use std::path::{Path, PathBuf};
use std::time::Instant;

use airgen::aso::{
    ga_optimize, ga_optimize_observed, repeated_trials, AeroEvaluator, AsoError, GaConfig,
    LeRadiusDirection, OptimizationProblem, ThinAirfoilSurrogate, Xfoil, XfoilCase,
};
use airgen::baselines::{build_baseline, svd_fit, BaselineKind};
use airgen::curves::{bezier_eval, bspline_basis, bspline_eval, clamped_uniform_knots, curve_features, BSplineSpec};
use airgen::eval::{cmax_table, feasibility_ratio, inverse_fit_all};
use airgen::geom::{
    build_dataset, cosine_grid, decompose, extract_features, naca, resample_to_section, synth, AirfoilDataset,
    Feature, FeatureNormalizer, FilterConfig, FEASIBILITY_TOL,
};
use airgen::param::Parameterization;
use airgen::stats::{median, pearson};
use airgen::train::{diagnostics, train, training_latent_box, TrainConfig};
use airgen::vae::{
    gradient_check, latent_box_or_range, mse_phys_random, AirfoilGenerator, BranchConfig, Checkpoint, LossConfig,
    Model, ModelConfig,
};
use airgen::{AirfoilSection, ThicknessCamber};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Report {
    hard_failures: usize,
    counts: [usize; 3],
}

impl Report {
    fn line(&mut self, id: &str, hard: bool, status: Status, detail: impl AsRef<str>) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        };
        println!("{tag:<7} {id:<4} {}", detail.as_ref());
        self.counts[status as usize] += 1;
        if hard && status == Status::Fail {
            self.hard_failures += 1;
        }
    }

    fn check(&mut self, id: &str, hard: bool, ok: bool, detail: impl AsRef<str>) {
        self.line(id, hard, if ok { Status::Pass } else { Status::Fail }, detail);
    }
}

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

struct Corpus {
    dataset: AirfoilDataset,
    /// Sections never seen in training.
    held_out: Vec<ThicknessCamber>,
    label: String,
    real: Option<PathBuf>,
}

fn corpus(scratch: &Path) -> Corpus {
    if let Some(dir) = std::env::var_os("AG_UIUC_DIR").map(PathBuf::from).filter(|d| d.is_dir()) {
        let (dataset, _) = build_dataset(&dir, &FilterConfig::default(), 0).expect("UIUC corpus builds");
        let held_out = dataset.validation.iter().map(|&i| dataset.samples[i].clone()).collect();
        let label = format!("UIUC corpus, {} sections", dataset.len());
        return Corpus { dataset, held_out, label, real: Some(dir) };
    }
    let n = env_usize("AG_ACCEPT_SAMPLES", 300);
    let dir = scratch.join("synthetic");
    synth::write_corpus(&dir, &synth::SynthConfig { count: n, ..Default::default() }).unwrap();
    let (dataset, _) = build_dataset(&dir, &FilterConfig::default(), 0).unwrap();
    let held_out = synth::generate(&synth::SynthConfig { count: 200, seed: 999, ..Default::default() })
        .iter()
        .filter_map(|raw| resample_to_section(raw).ok())
        .map(|s| decompose(&s))
        .collect();
    let label = format!("synthetic corpus, {} sections", dataset.len());
    Corpus { dataset, held_out, label, real: None }
}

fn generator(ckpt: &Checkpoint) -> AirfoilGenerator {
    AirfoilGenerator::new(ckpt.model.clone(), ckpt.latent_box.clone())
}

fn desk_train(c: &Corpus, tweak: impl FnOnce(&mut TrainConfig)) -> (Checkpoint, f64) {
    let mut cfg = TrainConfig::desk();
    tweak(&mut cfg);
    let t0 = Instant::now();
    let ckpt = train(&c.dataset, &ModelConfig::desk(), &cfg).expect("desk training");
    (ckpt, t0.elapsed().as_secs_f64())
}

fn phys_random(ckpt: &Checkpoint) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    mse_phys_random(&ckpt.model, &ckpt.latent_box, 1000, &mut rng).unwrap()
}

// ---------------------------------------------------------------------------

fn criterion_1(r: &mut Report, c: &Corpus, trained: &Checkpoint) {
    let t0 = Instant::now();
    let mut worst = f64::INFINITY;
    let mut total = 0usize;
    let mut feasible = 0usize;
    let untrained = Model::new(ModelConfig::desk(), 99).unwrap();
    let samples: Vec<ThicknessCamber> = c.dataset.samples.clone();
    let untrained_box = training_latent_box(&untrained, &samples).unwrap();
    for (model, bx) in [(&untrained, &untrained_box), (&trained.model, &trained.latent_box)] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let z = bx.sample(&mut rng);
            let t_min = model.decode(&z).map(|d| d.tc.min_thickness()).unwrap_or(f64::NEG_INFINITY);
            worst = worst.min(t_min);
            total += 1;
            feasible += usize::from(t_min >= -FEASIBILITY_TOL);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    r.check(
        "1",
        true,
        feasible == total && secs < 60.0,
        format!(
            "feasibility guarantee: {feasible}/{total} latent-box samples feasible (untrained + trained), \
             min thickness {worst:.3e}, {secs:.1} s"
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bez_err: f64 = 0.0;
    for degree in [2usize, 3, 5] {
        let pts: Vec<(f64, f64)> = (0..=degree).map(|_| (rng.random::<f64>(), rng.random_range(-1.0..1.0))).collect();
        let spec = BSplineSpec::clamped(degree, pts.clone()).unwrap();
        for k in 0..=100 {
            let u = k as f64 / 100.0;
            let (a, b) = (spec.point(u), bezier_eval(&pts, u).unwrap());
            bez_err = bez_err.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
        }
    }
    let mut unity_err: f64 = 0.0;
    for (n, p) in [(12usize, 3usize), (8, 2), (15, 5)] {
        let knots = clamped_uniform_knots(n, p);
        for k in 0..=400 {
            let u = k as f64 / 400.0;
            let s: f64 = (0..n).map(|i| bspline_basis(i, p, u, &knots).unwrap()).sum();
            unity_err = unity_err.max((s - 1.0).abs());
        }
    }
    let pts: Vec<(f64, f64)> = (0..12).map(|i| (i as f64 / 11.0, rng.random_range(-0.2..0.2))).collect();
    let spec = BSplineSpec::clamped(3, pts).unwrap();
    let us: Vec<f64> = (1..100).map(|k| k as f64 / 100.0 + 1e-3).collect();
    let samples = bspline_eval(&spec, &us, 1).unwrap();
    let d1 = samples.d1.unwrap();
    let h = 1e-6;
    let mut der_err: f64 = 0.0;
    for (u, d) in us.iter().zip(&d1) {
        let (p, m) = (spec.point(u + h), spec.point(u - h));
        let fd = ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h));
        der_err = der_err.max((fd.0 - d.0).abs()).max((fd.1 - d.1).abs());
    }
    r.check(
        "2",
        true,
        bez_err < 1e-12 && unity_err < 1e-12 && der_err < 1e-6,
        format!(
            "curve oracles: Bezier/B-spline {bez_err:.1e} (<1e-12), partition of unity {unity_err:.1e} (<1e-12), \
             derivative vs finite difference {der_err:.1e} (<1e-6)"
        ),
    );
}

fn criterion_3(r: &mut Report) {
    let grid = cosine_grid();
    let f = extract_features(&decompose(&naca::naca4_section(0.0, 0.0, 0.12, &grid)));
    let r_exact = naca::naca4_le_radius(0.12);
    let naca_ok =
        (f.t_max - 0.12).abs() <= 1e-3 && f.m_max.abs() <= 1e-6 && ((f.r_le - r_exact) / r_exact).abs() <= 0.10;
    let a = 0.04;
    let c: Vec<f64> = grid.iter().map(|x| a * (std::f64::consts::PI * x).sin()).collect();
    let t: Vec<f64> = grid.iter().map(|&x| naca::naca4_thickness(0.1, x)).collect();
    let g = extract_features(&ThicknessCamber::new(grid.clone(), t, c)).gamma_te;
    let g_exact = (a * std::f64::consts::PI).atan();
    let g_rel = ((g - g_exact) / g_exact).abs();
    r.check(
        "3",
        true,
        naca_ok && g_rel < 0.02,
        format!(
            "feature oracles: NACA0012 t_max {:.5}, m_max {:.1e}, r_LE {:.5} (analytic {r_exact:.5}); \
             sine camber gamma_TE error {:.2}%",
            f.t_max,
            f.m_max,
            f.r_le,
            100.0 * g_rel
        ),
    );
}

fn criterion_4(r: &mut Report) {
    const STATIONS: [usize; 8] = [0, 6, 16, 30, 50, 70, 88, 100];
    let grid = cosine_grid();
    let full: Vec<ThicknessCamber> = [(0.0, 0.4, 0.12), (0.03, 0.4, 0.15), (0.05, 0.3, 0.09)]
        .iter()
        .map(|&(m, p, t)| decompose(&naca::naca4_section(m, p, t, &grid)))
        .collect();
    let feats: Vec<_> = full.iter().map(extract_features).collect();
    let nrm = airgen::geom::fit_normalizer(&feats).unwrap();
    let batch: Vec<ThicknessCamber> = full.iter().map(|tc| tc.decimate(&STATIONS)).collect();
    let branch = BranchConfig { n_filter: 2, n_latent_total: 4, hidden: vec![6, 8], ..BranchConfig::default() };
    let config = ModelConfig { grid: batch[0].x.clone(), ..ModelConfig::symmetric(branch) };
    let model = Model::new(config, 17).unwrap().with_normalizer(nrm);
    let latents: Vec<Vec<f64>> = batch.iter().map(|tc| model.encode(tc).unwrap().means()).collect();
    let bx = latent_box_or_range(&latents);
    let t0 = Instant::now();
    let terms = [
        ("recon", LossConfig { beta: 0.0, lambda: 0.0, latent_sampling: false, n_random: 0 }),
        ("kld", LossConfig { beta: 1.0, lambda: 0.0, latent_sampling: false, n_random: 0 }),
        ("phys_train", LossConfig { beta: 0.0, lambda: 10.0, latent_sampling: false, n_random: 0 }),
        ("phys_random", LossConfig { beta: 0.0, lambda: 10.0, latent_sampling: true, n_random: 4 }),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, cfg) in terms {
        let e = gradient_check(&model, &batch, &cfg, &bx, 5, 1e-5).unwrap().relative_error();
        worst = worst.max(e);
        parts.push(format!("{name} {e:.1e}"));
    }
    let secs = t0.elapsed().as_secs_f64();
    r.check(
        "4",
        true,
        worst < 1e-4 && secs < 60.0,
        format!("gradient check (relative, <1e-4): {}; {secs:.1} s", parts.join(", ")),
    );
}

fn alignment(ckpt: &Checkpoint, nrm: &FeatureNormalizer, held: &[ThicknessCamber]) -> ([f64; 4], [f64; 4]) {
    let mut z = vec![Vec::new(); 4];
    let mut input = vec![Vec::new(); 4];
    let mut decoded = vec![Vec::new(); 4];
    for tc in held {
        let means = ckpt.model.encode(tc).unwrap().means();
        let dec = ckpt.model.decode(&means).unwrap();
        let fi = nrm.normalize(&extract_features(tc));
        let fd = nrm.normalize(&curve_features(&dec.thickness_net, &dec.camber_net).unwrap());
        for f in Feature::ALL {
            z[f.index()].push(means[ckpt.model.config.phys_index(f)]);
            input[f.index()].push(fi[f.index()]);
            decoded[f.index()].push(fd[f.index()]);
        }
    }
    let r = |a: &[f64], b: &[f64]| pearson(a, b).map_or(0.0, f64::abs);
    (
        std::array::from_fn(|i| r(&z[i], &input[i])),
        std::array::from_fn(|i| r(&z[i], &decoded[i])),
    )
}

fn fmt4(v: &[f64; 4]) -> String {
    Feature::ALL.iter().map(|f| format!("{} {:.3}", f.name(), v[f.index()])).collect::<Vec<_>>().join(", ")
}

fn criterion_5(r: &mut Report, c: &Corpus, ckpt: &Checkpoint, secs: f64) {
    let nrm = c.dataset.normalizer.clone();
    let (input, decoded) = alignment(ckpt, &nrm, &c.held_out);
    let n = c.held_out.len();
    r.check(
        "5a",
        false,
        input.iter().all(|v| *v >= 0.95) && secs <= 3600.0,
        format!(
            "latent vs input-section feature, {n} held-out ({}; {:.0} s training): {} (>=0.95)",
            c.label,
            secs,
            fmt4(&input)
        ),
    );
    r.check(
        "5b",
        false,
        decoded.iter().all(|v| *v >= 0.95),
        format!("latent vs decoded-section feature, {n} held-out: {} (>=0.95)", fmt4(&decoded)),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cm = cmax_table(&generator(ckpt), 10_000, &mut rng);
    let vals: [f64; 4] = std::array::from_fn(|i| cm.values[i].unwrap_or(0.0));
    r.check(
        "5c",
        false,
        vals.iter().all(|v| *v >= 0.98),
        format!(
            "C_max at desk scale (the 0.98 target is stated for 25,000 epochs, not run here): {}",
            fmt4(&vals)
        ),
    );
}

fn criterion_6(r: &mut Report, with: &Checkpoint, without: &Checkpoint) {
    let (a, b) = (phys_random(with), phys_random(without));
    r.check(
        "6",
        false,
        a <= 0.5 * b,
        format!("latent-sampling regularization: mse_phys_random {a:.3e} with vs {b:.3e} without (ratio {:.2}, need <=0.5)", a / b),
    );
}

fn criterion_7(r: &mut Report, c: &Corpus, runs: &[(f64, &Checkpoint)]) {
    let samples = c.dataset.train_samples();
    let mut rows = Vec::new();
    for (beta, ckpt) in runs {
        let d = diagnostics(ckpt, &samples).unwrap();
        rows.push((*beta, d.active.count, d.correlation.c_bar));
    }
    let counts_ok = rows.windows(2).all(|w| w[1].1 <= w[0].1);
    let cbar_ok = rows[1].2 < rows[0].2;
    let detail = rows
        .iter()
        .map(|(b, n, cb)| format!("beta {b:.1e}: {n} active, C-bar {cb:.3}"))
        .collect::<Vec<_>>()
        .join("; ");
    r.check("7", false, counts_ok && cbar_ok, format!("active-latent deactivation: {detail}"));
}

fn criterion_8(r: &mut Report, c: &Corpus, ckpt: &Checkpoint) {
    let n = env_usize("AG_ACCEPT_TARGETS", 5).min(c.held_out.len());
    let targets: Vec<AirfoilSection> = c.held_out.iter().take(n).map(ThicknessCamber::recompose).collect();
    let sections: Vec<AirfoilSection> = c.dataset.train_samples().iter().map(|tc| tc.recompose()).collect();
    let cst = build_baseline(BaselineKind::Cst, 10, &sections, None).unwrap();
    let ag = generator(ckpt);
    let cfg = GaConfig::inverse_fit(1000, 8);
    let t0 = Instant::now();
    let fit = |p: &dyn Parameterization| -> Vec<f64> {
        inverse_fit_all(p, &targets, &cfg, 1).into_iter().map(|f| f.map_or(f64::INFINITY, |f| f.mse)).collect()
    };
    let ag_mse = fit(&ag);
    let cst_mse = fit(cst.as_ref());
    let secs = t0.elapsed().as_secs_f64();
    let (a, b) = (median(&ag_mse), median(&cst_mse));
    r.check(
        "8",
        false,
        a < b && (n != 5 || secs < 600.0),
        format!(
            "inverse fitting, {n} held-out targets (pop 200, stall 200, cap 1000): median MSE AG-{} {a:.3e} vs CST-10 {b:.3e}; {secs:.0} s",
            ag.n_dv()
        ),
    );
}

fn criterion_9(r: &mut Report, c: &Corpus, ckpt: &Checkpoint) {
    let sections: Vec<AirfoilSection> = c.dataset.train_samples().iter().map(|tc| tc.recompose()).collect();
    let svd = svd_fit(&sections, 10).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (kind, n) in [(BaselineKind::Parsec, 12), (BaselineKind::Cst, 10), (BaselineKind::Svd, 10), (BaselineKind::Bezier, 10)] {
        let p = build_baseline(kind, n, &sections, Some(&svd)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ratio = feasibility_ratio(p.as_ref(), 10_000, &mut rng);
        ok &= ratio < 95.0;
        parts.push(format!("{} {ratio:.1}%", p.name()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ag = generator(ckpt);
    let ag_ratio = feasibility_ratio(&ag, 10_000, &mut rng);
    ok &= ag_ratio == 100.0;
    parts.push(format!("{} {ag_ratio:.1}%", ag.name()));
    r.check("9", false, ok, format!("feasibility ratios on 10,000 samples (baselines <95%, AG 100%): {}", parts.join(", ")));
}

fn criterion_10(r: &mut Report, c: &Corpus, scratch: &Path) {
    let dir = c.real.clone().unwrap_or_else(|| scratch.join("synthetic"));
    let build = |tag: &str| {
        let (ds, _) = build_dataset(&dir, &FilterConfig::default(), 0).unwrap();
        let path = scratch.join(format!("dataset_{tag}.json"));
        ds.save(&path).unwrap();
        (ds.len(), std::fs::read(&path).unwrap())
    };
    let (n1, b1) = build("a");
    let (_, b2) = build("b");
    let identical = b1 == b2;
    match &c.real {
        Some(_) => r.check(
            "10",
            false,
            (1509..=1569).contains(&n1) && identical,
            format!("dataset pipeline: {n1} retained (1539 +/- 30), re-run byte-identical: {identical}"),
        ),
        None => {
            r.line("10", false, Status::Blocked, "dataset count needs the UIUC mirror (set AG_UIUC_DIR)");
            r.check("10b", false, identical, format!("determinism on the synthetic corpus: re-run byte-identical: {identical}"));
        }
    }
}

fn criterion_11(r: &mut Report, ckpt: &Checkpoint) {
    let solver = match Xfoil::locate(Some(Path::new("xfoil")), XfoilCase::default()) {
        Ok(s) => s,
        Err(e) => {
            r.line("11", false, Status::Blocked, format!("solver smoke run needs XFOIL ({e})"));
            return;
        }
    };
    let naca = naca::naca4_section(0.0, 0.0, 0.12, &cosine_grid());
    let base = match solver.evaluate(&naca) {
        Ok(res) if res.converged => res,
        other => {
            r.check("11", false, false, format!("NACA0012 golden run did not converge: {other:?}"));
            return;
        }
    };
    let cl = base.cl.unwrap_or(f64::NAN);
    let base_ld = base.lift_to_drag().unwrap_or(f64::NAN);
    let cfg = GaConfig { population: 30, generations: 30, seed: 11, ..GaConfig::default() };
    let ag = generator(ckpt);
    let stats = repeated_trials(&OptimizationProblem::unconstrained(), &ag, Some(&ag), &solver, &cfg, 3);
    match stats {
        Ok(s) => {
            let runs: Vec<_> = s.runs.iter().filter_map(|r| r.as_ref().ok()).collect();
            let best = runs.iter().map(|r| r.history.best_objective).fold(f64::NEG_INFINITY, f64::max);
            let monotone = runs.iter().all(|r| r.history.best.windows(2).all(|w| w[1] >= w[0]));
            r.check(
                "11",
                false,
                cl.abs() < 0.01 && best > base_ld && monotone && runs.len() == 3,
                format!("solver smoke: NACA0012 Cl {cl:.4}, L/D {base_ld:.1}; desk ASO best L/D {best:.1}, monotone {monotone}"),
            );
        }
        Err(e) => r.check("11", false, false, format!("desk ASO failed: {e}")),
    }
}

fn criterion_12(r: &mut Report, c: &Corpus, ckpt: &Checkpoint) {
    let direction = LeRadiusDirection::Below;
    let problem = OptimizationProblem::constrained(direction);
    let nrm = c.dataset.normalizer.clone();
    let n = |f: Feature, v: f64| nrm.normalize_value(f, v);
    let (t_lo, t_hi) = problem.constraints.t_max_range.unwrap();
    let limits = [
        (Feature::MaxThickness, n(Feature::MaxThickness, t_lo), n(Feature::MaxThickness, t_hi)),
        (Feature::MaxCamber, f64::NEG_INFINITY, n(Feature::MaxCamber, problem.constraints.m_max_below.unwrap())),
        (Feature::LeRadius, f64::NEG_INFINITY, n(Feature::LeRadius, problem.constraints.r_le_limit.unwrap())),
    ];
    let ag = generator(ckpt);
    let cfg = GaConfig { population: 30, generations: 10, seed: 12, ..GaConfig::default() };
    let aero = ThinAirfoilSurrogate::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let run = ga_optimize_observed(&problem, &ag, Some(&ag), &aero, &cfg, |g| {
        for z in g.individuals {
            let dec = ckpt.model.decode(z).unwrap();
            let f = nrm.normalize(&curve_features(&dec.thickness_net, &dec.camber_net).unwrap());
            for (feat, lo, hi) in limits {
                let v = f[feat.index()];
                worst = worst.max(lo - v).max(v - hi);
            }
            checked += 1;
        }
    });
    let ag_detail = match &run {
        Ok(_) => format!("AG: {checked} individuals, worst normalized violation {worst:.4} (tol 0.02)"),
        Err(e) => format!("AG run failed: {e}"),
    };
    let sections: Vec<AirfoilSection> = c.dataset.train_samples().iter().map(|tc| tc.recompose()).collect();
    let cst = build_baseline(BaselineKind::Cst, 10, &sections, None).unwrap();
    let (baseline_ok, cst_detail) = match ga_optimize(&problem, cst.as_ref(), None, &aero, &cfg) {
        Ok(run) => {
            let rc = run.rejections;
            let share = 100.0 * rc.constraint as f64 / rc.evaluated.max(1) as f64;
            (rc.constraint > 0, format!("CST-10 death-penalty rejections {share:.1}% of {} evaluations", rc.evaluated))
        }
        Err(AsoError::EvaluatorFailure { generations }) => {
            (true, format!("CST-10 rejected every design for {generations} generations"))
        }
        Err(e) => (false, format!("CST-10 run failed: {e}")),
    };
    r.check(
        "12",
        false,
        run.is_ok() && worst <= 0.02 && baseline_ok,
        format!("constrained soundness (r_LE below 0.005): {ag_detail}; {cst_detail}"),
    );
}

fn main() {
    let started = Instant::now();
    let scratch = tempfile::tempdir().unwrap();
    let mut r = Report { hard_failures: 0, counts: [0; 3] };

    let c = corpus(scratch.path());
    eprintln!("acceptance: {}; training four desk models (2,000 epochs each)", c.label);
    let (reference, secs) = desk_train(&c, |_| {});
    criterion_1(&mut r, &c, &reference);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r, &c, &reference, secs);
    let (no_sampling, _) = desk_train(&c, |t| t.latent_sampling = false);
    criterion_6(&mut r, &reference, &no_sampling);
    drop(no_sampling);
    let (low, _) = desk_train(&c, |t| t.beta = 1e-9);
    let (high, _) = desk_train(&c, |t| t.beta = 1e-7);
    criterion_7(&mut r, &c, &[(1e-9, &low), (2.5e-8, &reference), (1e-7, &high)]);
    criterion_8(&mut r, &c, &reference);
    criterion_9(&mut r, &c, &reference);
    criterion_10(&mut r, &c, scratch.path());
    criterion_11(&mut r, &reference);
    criterion_12(&mut r, &c, &reference);

    println!(
        "summary: {} pass, {} fail, {} blocked; {:.0} s",
        r.counts[0],
        r.counts[1],
        r.counts[2],
        started.elapsed().as_secs_f64()
    );
    if r.hard_failures > 0 {
        std::process::exit(1);
    }
}
