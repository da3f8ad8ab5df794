use std::path::{Path, PathBuf};

use airgen::aso::{
    parallel_coordinates_export, repeated_trials, write_history_csv, write_parallel_csv, AeroEvaluator,
    ConstraintSet, GaConfig, OptimizationProblem, ThinAirfoilSurrogate, Xfoil, SOLVER_ENV,
};
use airgen::baselines::{build_baseline, svd_fit, BaselineKind};
use airgen::eval::{
    cmax_table, feasibility_ratio, inverse_fit_all, latent_traversal, write_cdf_csv, write_cmax_csv,
    write_feasibility_csv, write_traversal_csv, MetricTable,
};
use airgen::geom::{
    build_dataset, decompose, extract_features, parse_coordinate_file, resample_to_section, synth, write_selig,
    AirfoilDataset, AirfoilSection, Feature,
};
use airgen::io::{atomic_write, write_csv_table, write_json};
use airgen::param::Parameterization;
use airgen::train::{diagnostics, grid_search, train, write_loss_csv, TrainError};
use airgen::vae::{AirfoilGenerator, Checkpoint};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{stream, EvaluatorKind, Layout, RunConfig};
use crate::{Cli, CliError, Command, Metric, Problem};

struct Ctx {
    cfg: RunConfig,
    layout: Layout,
    jobs: usize,
}

impl Ctx {
    fn rng(&self, stream: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed_for(stream))
    }

    fn finish(&self, dir: &Path, command: &str) -> Result<(), CliError> {
        let path = self.cfg.write_resolved(dir, command)?;
        log::info!("resolved configuration written to {}", path.display());
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    let jobs = cli.jobs.max(1);
    cfg.ga.jobs = jobs;
    let ctx = Ctx { layout: Layout::new(&cfg.output.dir), cfg, jobs };
    match cli.command {
        Command::Preprocess { raw_dir, output, synthetic } => preprocess(&ctx, &raw_dir, output, synthetic),
        Command::Train { dataset, output } => train_cmd(&ctx, &dataset, output),
        Command::Gridsearch { dataset, output } => gridsearch(&ctx, &dataset, output),
        Command::Generate { model, n, fix, output } => generate(&ctx, &model, n, &fix, output),
        Command::Encode { model, files } => encode(&model, &files),
        Command::Fit { method, ndv, dataset, model, targets } => {
            fit(&ctx, &method, ndv, &dataset, model.as_deref(), targets)
        }
        Command::Evaluate { metric, dataset, model, methods, samples, dim, steps, base } => {
            evaluate(&ctx, metric, &dataset, model.as_deref(), &methods, samples, dim, steps, base)
        }
        Command::Optimize { problem, trials, method, ndv, dataset, model } => {
            optimize(&ctx, problem, trials, &method, ndv, &dataset, model.as_deref())
        }
        Command::Export { dataset, model, methods, samples } => {
            export(&ctx, &dataset, model.as_deref(), &methods, samples)
        }
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(parent_dir(path))?;
    Ok(())
}

fn train_sections(ds: &AirfoilDataset) -> Vec<AirfoilSection> {
    ds.train_samples().iter().map(|tc| tc.recompose()).collect()
}

fn preprocess(ctx: &Ctx, raw_dir: &Path, output: Option<PathBuf>, synthetic: Option<usize>) -> Result<(), CliError> {
    if let Some(count) = synthetic {
        let sc = synth::SynthConfig { count, seed: ctx.cfg.seed_for(stream::SYNTHETIC), ..Default::default() };
        let n = synth::write_corpus(raw_dir, &sc)?;
        log::info!("wrote {n} synthetic sections to {}", raw_dir.display());
    }
    if !raw_dir.is_dir() {
        return Err(CliError::Data(format!("{} is not a directory", raw_dir.display())));
    }
    let out = output.unwrap_or_else(|| ctx.layout.datasets().join("dataset.json"));
    ensure_parent(&out)?;
    let (mut ds, report) = build_dataset(raw_dir, &ctx.cfg.dataset.filter, ctx.cfg.seed_for(stream::DATASET))?;
    let sections = train_sections(&ds);
    let modes = ctx.cfg.dataset.svd_modes.min(sections.len());
    if modes > 0 {
        match svd_fit(&sections, modes) {
            Ok(m) => ds.svd = Some(m),
            Err(e) => log::warn!("no SVD modes stored: {e}"),
        }
    }
    ds.save(&out)?;
    let mut report_path = out.clone().into_os_string();
    report_path.push(".report.json");
    write_json(Path::new(&report_path), &report)?;
    println!(
        "retained {} of {} files ({} rejected) -> {}",
        ds.len(),
        report.files_seen,
        report.rejections.len(),
        out.display()
    );
    ctx.finish(&parent_dir(&out), "preprocess")
}

fn train_cmd(ctx: &Ctx, dataset: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let ds = AirfoilDataset::load(dataset)?;
    let out = output.unwrap_or_else(|| ctx.layout.checkpoints().join("model.agck"));
    ensure_parent(&out)?;
    let reports = ctx.layout.reports();
    std::fs::create_dir_all(&reports)?;
    let ckpt = match train(&ds, &ctx.cfg.model.model_config(), &ctx.cfg.training) {
        Ok(c) => c,
        Err(TrainError::DivergedLoss { epoch, last_good }) => {
            last_good.save(&out)?;
            return Err(CliError::Data(format!(
                "training diverged at epoch {epoch}; last good state saved to {}",
                out.display()
            )));
        }
        Err(e) => return Err(e.into()),
    };
    ckpt.save(&out)?;
    write_loss_csv(&reports.join("loss_history.csv"), &ckpt.meta.history)?;
    let diag = diagnostics(&ckpt, &ds.train_samples())?;
    write_json(&reports.join("diagnostics.json"), &diag)?;
    if let Some(last) = ckpt.meta.history.last() {
        println!(
            "trained {} epochs: recon {:.3e}, phys {:.3e}/{:.3e}, active latents {} -> {}",
            last.epoch + 1,
            last.recon,
            last.phys_train,
            last.phys_random,
            diag.active.count,
            out.display()
        );
    }
    ctx.finish(&parent_dir(&out), "train")
}

fn gridsearch(ctx: &Ctx, dataset: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let ds = AirfoilDataset::load(dataset)?;
    let out = output.unwrap_or_else(|| ctx.layout.reports().join("gridsearch.json"));
    ensure_parent(&out)?;
    let report = grid_search(&ds, &ctx.cfg.model.model_config(), &ctx.cfg.training, &ctx.cfg.grid);
    write_json(&out, &report)?;
    if let Some(best) = report.ranked.first() {
        println!("best cell: {:?} -> {}", best.cell, out.display());
    }
    ctx.finish(&parent_dir(&out), "gridsearch")
}

fn parse_fix(items: &[String], ckpt: &Checkpoint) -> Result<Vec<(Feature, f64)>, CliError> {
    let normalizer = ckpt
        .model
        .normalizer
        .as_ref()
        .ok_or_else(|| CliError::Data("checkpoint has no feature normalizer".into()))?;
    items
        .iter()
        .map(|item| {
            let (name, value) =
                item.split_once('=').ok_or_else(|| CliError::Usage(format!("--fix expects feature=value, got `{item}`")))?;
            let f = Feature::from_name(name.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown feature `{name}` (m_max, gamma_te, t_max, r_le)")))?;
            let v: f64 =
                value.trim().parse().map_err(|_| CliError::Usage(format!("`{value}` is not a number")))?;
            Ok((f, normalizer.normalize_value(f, v)))
        })
        .collect()
}

fn generate(ctx: &Ctx, model: &Path, n: usize, fix: &[String], output: Option<PathBuf>) -> Result<(), CliError> {
    let ckpt = Checkpoint::load(model)?;
    let fixed = parse_fix(fix, &ckpt)?;
    let dir = output.unwrap_or_else(|| ctx.layout.airfoils());
    std::fs::create_dir_all(&dir)?;
    let mut rng = ctx.rng(stream::SAMPLING);
    let sections = airgen::eval::constrained_generate(&ckpt, &fixed, n, &mut rng)?;
    for (i, s) in sections.iter().enumerate() {
        let name = format!("generated_{i:04}");
        let path = dir.join(format!("{name}.dat"));
        atomic_write(&path, write_selig(&name, &s.selig_points()).as_bytes())?;
        let f = extract_features(&decompose(s));
        println!(
            "{}  m_max {:.4}  gamma_te {:.4}  t_max {:.4}  r_le {:.5}",
            path.display(),
            f.m_max,
            f.gamma_te,
            f.t_max,
            f.r_le
        );
    }
    ctx.finish(&dir, "generate")
}

fn encode(model: &Path, files: &[PathBuf]) -> Result<(), CliError> {
    let ckpt = Checkpoint::load(model)?;
    let d = ckpt.model.latent_dim();
    let header: Vec<String> = std::iter::once("file".to_string()).chain((0..d).map(|i| format!("z{i}"))).collect();
    println!("{}", header.join(","));
    for file in files {
        let bytes = std::fs::read(file)?;
        let raw = parse_coordinate_file(&bytes)?;
        let section = resample_to_section(&raw)?;
        let z = ckpt.model.encode(&decompose(&section))?.means();
        let cols: Vec<String> = z.iter().map(|v| format!("{v:.8}")).collect();
        println!("{},{}", file.display(), cols.join(","));
    }
    Ok(())
}

/// A parameterization chosen on the command line.
enum Method {
    Generator(AirfoilGenerator),
    Baseline(Box<dyn Parameterization>),
}

impl Method {
    fn param(&self) -> &dyn Parameterization {
        match self {
            Method::Generator(g) => g,
            Method::Baseline(b) => b.as_ref(),
        }
    }

    fn generator(&self) -> Option<&AirfoilGenerator> {
        match self {
            Method::Generator(g) => Some(g),
            Method::Baseline(_) => None,
        }
    }

    fn label(&self) -> String {
        self.param().name().to_lowercase().replace(' ', "_")
    }
}

/// `name` or `name:ndv`.
fn parse_method_spec(spec: &str, ndv: Option<usize>) -> Result<(String, Option<usize>), CliError> {
    match spec.split_once(':') {
        Some((name, n)) => {
            let n = n.parse().map_err(|_| CliError::Usage(format!("bad design-variable count in `{spec}`")))?;
            Ok((name.to_ascii_lowercase(), Some(n)))
        }
        None => Ok((spec.to_ascii_lowercase(), ndv)),
    }
}

fn build_method(spec: &str, ndv: Option<usize>, ds: &AirfoilDataset, ckpt: Option<&Checkpoint>) -> Result<Method, CliError> {
    let (name, ndv) = parse_method_spec(spec, ndv)?;
    if name == "ag" {
        let ckpt = ckpt.ok_or_else(|| CliError::Usage("method `ag` needs a checkpoint (-m)".into()))?;
        if let Some(n) = ndv {
            if n != ckpt.model.latent_dim() {
                return Err(CliError::Usage(format!("checkpoint has {} latents, not {n}", ckpt.model.latent_dim())));
            }
        }
        if ckpt.model.normalizer.is_none() {
            return Err(CliError::Data("checkpoint has no feature normalizer".into()));
        }
        return Ok(Method::Generator(AirfoilGenerator::new(ckpt.model.clone(), ckpt.latent_box.clone())));
    }
    let kind = BaselineKind::from_name(&name)
        .ok_or_else(|| CliError::Usage(format!("unknown method `{name}` (ag, cst, parsec, bezier, svd)")))?;
    let n = ndv.or(kind.fixed_n_dv()).unwrap_or(10);
    let p = build_baseline(kind, n, &train_sections(ds), ds.svd.as_ref())?;
    Ok(Method::Baseline(p))
}

fn default_methods(ckpt: Option<&Checkpoint>) -> Vec<String> {
    let mut v: Vec<String> = BaselineKind::ALL.iter().map(|k| k.name().to_string()).collect();
    if ckpt.is_some() {
        v.insert(0, "ag".into());
    }
    v
}

fn load_ckpt(model: Option<&Path>) -> Result<Option<Checkpoint>, CliError> {
    model.map(Checkpoint::load).transpose().map_err(CliError::from)
}

fn fit(
    ctx: &Ctx,
    method: &str,
    ndv: Option<usize>,
    dataset: &Path,
    model: Option<&Path>,
    targets: Option<usize>,
) -> Result<(), CliError> {
    let ds = AirfoilDataset::load(dataset)?;
    let ckpt = load_ckpt(model)?;
    let m = build_method(method, ndv, &ds, ckpt.as_ref())?;
    let mut pool = ds.validation.clone();
    pool.shuffle(&mut ctx.rng(stream::SAMPLING));
    pool.truncate(targets.unwrap_or(ctx.cfg.evaluation.targets));
    let sections: Vec<AirfoilSection> = pool.iter().map(|&i| ds.samples[i].recompose()).collect();
    let ev = &ctx.cfg.evaluation;
    let ga = GaConfig {
        population: ev.fit_population,
        generations: ev.fit_max_generations,
        stall_generations: Some(ev.fit_stall_generations),
        ..ctx.cfg.ga.clone()
    };
    let results = inverse_fit_all(m.param(), &sections, &ga, ctx.jobs);
    let reports = ctx.layout.reports();
    std::fs::create_dir_all(&reports)?;
    let mut rows = Vec::new();
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(r) => rows.push(vec![pool[k] as f64, r.mse, r.generations as f64]),
            Err(e) => log::warn!("target {} failed: {e}", pool[k]),
        }
    }
    let path = reports.join(format!("fit_{}.csv", m.label()));
    write_csv_table(&path, &["sample", "mse", "generations"], &rows)?;
    let mut mses: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    mses.sort_by(f64::total_cmp);
    if !mses.is_empty() {
        println!("{}: {} targets, median MSE {:.3e} -> {}", m.param().name(), mses.len(), airgen::stats::median(&mses), path.display());
    }
    write_fig8(ctx)?;
    ctx.finish(&reports, "fit")
}

/// Rebuild the CDF table from every `fit_<method>.csv` in the reports
/// directory.
fn write_fig8(ctx: &Ctx) -> Result<(), CliError> {
    let reports = ctx.layout.reports();
    let mut methods = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(&reports)?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    entries.sort();
    for path in entries {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(label) = name.strip_prefix("fit_").and_then(|n| n.strip_suffix(".csv")) else { continue };
        let text = std::fs::read_to_string(&path)?;
        let mses: Vec<f64> = text.lines().skip(1).filter_map(|l| l.split(',').nth(1)?.parse().ok()).collect();
        if !mses.is_empty() {
            methods.push((label.to_string(), mses));
        }
    }
    if methods.is_empty() {
        return Err(CliError::Data(format!("no fit_<method>.csv results in {}", reports.display())));
    }
    let path = reports.join("fig8_cdf.csv");
    write_cdf_csv(&path, &methods, ctx.cfg.evaluation.cdf_points)?;
    println!("cumulative MSE curves for {} methods -> {}", methods.len(), path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    ctx: &Ctx,
    metric: Metric,
    dataset: &Path,
    model: Option<&Path>,
    methods: &[String],
    samples: Option<usize>,
    dim: Option<usize>,
    steps: usize,
    base: usize,
) -> Result<(), CliError> {
    let reports = ctx.layout.reports();
    std::fs::create_dir_all(&reports)?;
    if metric == Metric::Cdf {
        write_fig8(ctx)?;
        return ctx.finish(&reports, "evaluate");
    }
    let ds = AirfoilDataset::load(dataset)?;
    let ckpt = load_ckpt(model)?;
    let n = samples.unwrap_or(ctx.cfg.evaluation.samples);
    if metric == Metric::Traversal {
        let ckpt = ckpt.ok_or_else(|| CliError::Usage("traversal needs a checkpoint (-m)".into()))?;
        let dim = dim.ok_or_else(|| CliError::Usage("traversal needs --dim".into()))?;
        let section = ds
            .samples
            .get(base)
            .ok_or_else(|| CliError::Usage(format!("--base {base} out of range ({} samples)", ds.len())))?
            .recompose();
        let steps = latent_traversal(&ckpt, &section, dim, steps)?;
        let path = reports.join("fig11_traversal.csv");
        write_traversal_csv(&path, &steps)?;
        for s in &steps {
            let f = extract_features(&decompose(&s.section));
            println!("z{dim} = {:+.4}: m_max {:.4} gamma_te {:.4} t_max {:.4} r_le {:.5}", s.value, f.m_max, f.gamma_te, f.t_max, f.r_le);
        }
        println!("-> {}", path.display());
        return ctx.finish(&reports, "evaluate");
    }
    let specs = if methods.is_empty() { default_methods(ckpt.as_ref()) } else { methods.to_vec() };
    let mut rows = Vec::new();
    for spec in &specs {
        let m = build_method(spec, None, &ds, ckpt.as_ref())?;
        let mut rng = ctx.rng(stream::SAMPLING);
        let mut row = MetricTable {
            method: m.param().name(),
            n_dv: m.param().n_dv(),
            feasibility_percent: None,
            cmax: None,
            mse_percentiles: None,
        };
        match metric {
            Metric::Feasibility => {
                let r = feasibility_ratio(m.param(), n, &mut rng);
                println!("{:<10} feasible {r:6.1}%", row.method);
                row.feasibility_percent = Some(r);
            }
            Metric::Cmax => {
                let c = cmax_table(m.param(), n, &mut rng);
                let fmt = |v: Option<f64>| v.map_or("   -".to_string(), |v| format!("{v:.2}"));
                println!(
                    "{:<10} C_max m_max {} gamma_te {} t_max {} log r_le {}",
                    row.method,
                    fmt(c.values[0]),
                    fmt(c.values[1]),
                    fmt(c.values[2]),
                    fmt(c.values[3])
                );
                row.cmax = Some(c);
            }
            Metric::Cdf | Metric::Traversal => unreachable!("handled above"),
        }
        rows.push(row);
    }
    let path = match metric {
        Metric::Feasibility => {
            let p = reports.join("table3_feasibility.csv");
            write_feasibility_csv(&p, &rows)?;
            p
        }
        _ => {
            let p = reports.join("table4_cmax.csv");
            write_cmax_csv(&p, &rows)?;
            p
        }
    };
    println!("-> {}", path.display());
    ctx.finish(&reports, "evaluate")
}

fn evaluator(ctx: &Ctx) -> Result<Box<dyn AeroEvaluator>, CliError> {
    let x = &ctx.cfg.xfoil;
    match x.evaluator {
        EvaluatorKind::Surrogate => Ok(Box::new(ThinAirfoilSurrogate::new(x.case()))),
        EvaluatorKind::Xfoil => Xfoil::locate(x.path.as_deref(), x.case()).map(|s| Box::new(s) as Box<dyn AeroEvaluator>).map_err(|e| match e {
            airgen::aso::AsoError::SolverNotFound(what) => CliError::Solver(format!(
                "flow solver not found ({what}); set `xfoil.path` in the config, the {SOLVER_ENV} environment variable, or `xfoil.evaluator = \"surrogate\"`"
            )),
            other => other.into(),
        }),
    }
}

fn optimize(
    ctx: &Ctx,
    problem: Problem,
    trials: Option<usize>,
    method: &str,
    ndv: Option<usize>,
    dataset: &Path,
    model: Option<&Path>,
) -> Result<(), CliError> {
    let aero = evaluator(ctx)?;
    let ds = AirfoilDataset::load(dataset)?;
    let ckpt = load_ckpt(model)?;
    let m = build_method(method, ndv, &ds, ckpt.as_ref())?;
    let mut prob = match problem {
        Problem::Unconstrained => OptimizationProblem::unconstrained(),
        Problem::Constrained => OptimizationProblem::constrained(ctx.cfg.optimize.r_le_direction),
    };
    prob.case = ctx.cfg.xfoil.case();
    let n_trials = trials.unwrap_or(ctx.cfg.optimize.trials);
    let stats = repeated_trials(&prob, m.param(), m.generator(), aero.as_ref(), &ctx.cfg.ga, n_trials)?;
    let reports = ctx.layout.reports();
    let airfoils = ctx.layout.airfoils();
    std::fs::create_dir_all(&reports)?;
    std::fs::create_dir_all(&airfoils)?;
    let fig = if problem == Problem::Unconstrained { "fig13" } else { "fig15" };
    let path = reports.join(format!("{fig}_history_{}.csv", m.label()));
    write_history_csv(&path, &stats)?;
    let mut failures = 0;
    for (i, run) in stats.runs.iter().enumerate() {
        match run {
            Ok(r) => {
                println!(
                    "trial {i}: best L/D {:.2} after {} evaluations ({} penalized)",
                    r.history.best_objective,
                    r.history.evaluations(),
                    r.history.rejections()
                );
                if r.best_section.is_none() {
                    println!("trial {i}: no admissible design found");
                }
                if let Some(s) = &r.best_section {
                    let name = format!("{}_{}_trial{i}", prob.name, m.label());
                    atomic_write(&airfoils.join(format!("{name}.dat")), write_selig(&name, &s.selig_points()).as_bytes())?;
                }
            }
            Err(e) => {
                failures += 1;
                println!("trial {i}: failed: {e}");
            }
        }
    }
    if let (Some(m), Some(s)) = (stats.mean.last(), stats.sigma.last()) {
        println!("mean best L/D {m:.2} ± {s:.2} over {} trials -> {}", n_trials - failures, path.display());
    }
    ctx.finish(&reports, "optimize")?;
    if failures == n_trials {
        return Err(CliError::Data("every trial failed".into()));
    }
    Ok(())
}

fn export(
    ctx: &Ctx,
    dataset: &Path,
    model: Option<&Path>,
    methods: &[String],
    samples: Option<usize>,
) -> Result<(), CliError> {
    let ds = AirfoilDataset::load(dataset)?;
    let ckpt = load_ckpt(model)?;
    let reports = ctx.layout.reports();
    std::fs::create_dir_all(&reports)?;
    let constraints = ConstraintSet::benchmark(ctx.cfg.optimize.r_le_direction);
    let specs = if methods.is_empty() { default_methods(ckpt.as_ref()) } else { methods.to_vec() };
    let n = samples.unwrap_or(1000);
    for spec in &specs {
        let m = build_method(spec, None, &ds, ckpt.as_ref())?;
        let rows = parallel_coordinates_export(m.param(), n, &constraints, &mut ctx.rng(stream::SAMPLING));
        let path = reports.join(format!("fig17_parallel_{}.csv", m.label()));
        write_parallel_csv(&path, &rows)?;
        let pass = |f: fn(&airgen::aso::ConstraintFlags) -> bool| {
            100.0 * rows.iter().filter(|r| f(&r.flags)).count() as f64 / rows.len().max(1) as f64
        };
        println!(
            "{:<10} pass t_min {:5.1}%  t_max {:5.1}%  m_max {:5.1}%  r_le {:5.1}% -> {}",
            m.param().name(),
            pass(|f| f.t_min),
            pass(|f| f.t_max),
            pass(|f| f.m_max),
            pass(|f| f.r_le),
            path.display()
        );
    }
    ctx.finish(&reports, "export")
}
