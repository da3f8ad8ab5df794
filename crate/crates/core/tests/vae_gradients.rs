use airgen::geom::{cosine_grid, decompose, extract_features, fit_normalizer, naca::naca4_section};
use airgen::vae::{gradient_check, latent_box_or_range, BranchConfig, LossConfig, Model, ModelConfig};
use airgen::ThicknessCamber;

const STATIONS: [usize; 8] = [0, 6, 16, 30, 50, 70, 88, 100];

fn setup() -> (Model, Vec<ThicknessCamber>) {
    let grid = cosine_grid();
    let full: Vec<ThicknessCamber> = [(0.0, 0.4, 0.12), (0.03, 0.4, 0.15), (0.05, 0.3, 0.09)]
        .iter()
        .map(|&(m, p, t)| decompose(&naca4_section(m, p, t, &grid)))
        .collect();
    let feats: Vec<_> = full.iter().map(extract_features).collect();
    let nrm = fit_normalizer(&feats).unwrap();
    let batch: Vec<ThicknessCamber> = full.iter().map(|tc| tc.decimate(&STATIONS)).collect();
    let branch = BranchConfig { n_filter: 2, n_latent_total: 4, hidden: vec![6, 8], ..BranchConfig::default() };
    let config = ModelConfig { grid: batch[0].x.clone(), ..ModelConfig::symmetric(branch) };
    (Model::new(config, 17).unwrap().with_normalizer(nrm), batch)
}

fn check(cfg: LossConfig) {
    let (model, batch) = setup();
    let latents: Vec<Vec<f64>> = batch.iter().map(|tc| model.encode(tc).unwrap().means()).collect();
    let bx = latent_box_or_range(&latents);
    let gc = gradient_check(&model, &batch, &cfg, &bx, 5, 1e-5).unwrap();
    let rel = gc.relative_error();
    assert!(rel < 1e-4, "relative gradient error {rel:.3e} for {cfg:?}");
}

#[test]
fn reconstruction_gradient() {
    check(LossConfig { beta: 0.0, lambda: 0.0, latent_sampling: false, n_random: 0 });
}

#[test]
fn kld_gradient() {
    check(LossConfig { beta: 1.0, lambda: 0.0, latent_sampling: false, n_random: 0 });
}

#[test]
fn physical_training_gradient() {
    check(LossConfig { beta: 0.0, lambda: 10.0, latent_sampling: false, n_random: 0 });
}

#[test]
fn physical_random_gradient() {
    check(LossConfig { beta: 0.0, lambda: 10.0, latent_sampling: true, n_random: 4 });
}
