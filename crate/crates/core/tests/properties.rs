use airgen::aso::{ga_maximize_observed, GaConfig};
use airgen::baselines::{parsec_features, parsec_solve, ParsecVars};
use airgen::curves::{net_to_distribution, realize_control_net, NetKind, RegulatedControlNet};
use airgen::eval::{cmax_from_samples, empirical_cdf, log_grid};
use airgen::geom::{cosine_grid, decompose, naca, Feature, FeatureNormalizer};
use airgen::stats::pearson;
use airgen::vae::{BranchConfig, Model, ModelConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn free_vars(kind: NetKind) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, kind.free_len())
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise hull (monotone chain), collinear points dropped.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut h: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0.0 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
    }
    h
}

fn inside_hull(h: &[(f64, f64)], p: (f64, f64), tol: f64) -> bool {
    (0..h.len()).all(|i| cross(h[i], h[(i + 1) % h.len()], p) >= -tol)
}

fn small_model(seed: u64) -> Model {
    let branch = BranchConfig { n_filter: 4, n_latent_total: 4, hidden: vec![16], ..BranchConfig::default() };
    Model::new(ModelConfig::symmetric(branch), seed).unwrap()
}

proptest! {
    #[test]
    fn thickness_net_invariants_hold(v in free_vars(NetKind::Thickness)) {
        let net = realize_control_net(NetKind::Thickness, &v).unwrap();
        prop_assert!(net.check_invariants());
        prop_assert_eq!(net.x[1], 0.0);
    }

    #[test]
    fn camber_net_invariants_hold(v in free_vars(NetKind::Camber)) {
        let net = realize_control_net(NetKind::Camber, &v).unwrap();
        prop_assert!(net.check_invariants());
    }

    #[test]
    fn thickness_is_non_negative_on_the_grid(v in free_vars(NetKind::Thickness)) {
        let net = realize_control_net(NetKind::Thickness, &v).unwrap();
        let d = net_to_distribution(&net, &cosine_grid()).unwrap();
        prop_assert!(d.values.iter().all(|t| *t >= 0.0), "{:?}", d.values);
    }

    #[test]
    fn curve_stays_in_control_hull(v in free_vars(NetKind::Camber)) {
        let net = realize_control_net(NetKind::Camber, &v).unwrap();
        let h = hull(net.control_points());
        prop_assume!(h.len() >= 3);
        for k in 0..=200 {
            let p = net.eval(k as f64 / 200.0)[0];
            prop_assert!(inside_hull(&h, p, 1e-12), "u = {} point {:?}", k as f64 / 200.0, p);
        }
    }

    #[test]
    fn decoder_output_is_feasible_for_any_weights(seed in 0u64..1000, scale in 0.1..5.0f64) {
        let model = small_model(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let z: Vec<f64> = (0..model.latent_dim()).map(|_| rng.random_range(-scale..scale)).collect();
            let dec = model.decode(&z).unwrap();
            prop_assert!(dec.tc.t.iter().all(|t| *t >= 0.0));
            prop_assert!(dec.section().is_feasible(0.0));
        }
    }

    #[test]
    fn normalizer_round_trips(
        lo in prop::array::uniform4(-1.0..1.0f64),
        width in prop::array::uniform4(0.01..2.0f64),
        u in prop::array::uniform4(-0.5..1.5f64),
    ) {
        let mut bounds = [(0.0, 0.0); 4];
        for i in 0..4 {
            bounds[i] = (lo[i], lo[i] + width[i]);
        }
        bounds[3] = (-4.0 + lo[3], -4.0 + lo[3] + width[3]);
        let n = FeatureNormalizer { bounds, log_r_le: true };
        for f in Feature::ALL {
            let raw = n.denormalize_value(f, u[f.index()]);
            prop_assert!((n.normalize_value(f, raw) - u[f.index()]).abs() < 1e-12);
        }
    }

    #[test]
    fn pearson_is_affine_invariant(
        xy in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 5..60),
        a in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64],
        b in -50.0..50.0f64,
    ) {
        let x: Vec<f64> = xy.iter().map(|p| p.0).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        match (pearson(&x, &y), pearson(&scaled, &y)) {
            (Some(r), Some(s)) => prop_assert!((r * a.signum() - s).abs() < 1e-9, "{} vs {}", r, s),
            (None, None) => {}
            (r, s) => prop_assert!(false, "{:?} vs {:?}", r, s),
        }
    }

    #[test]
    fn cmax_is_invariant_under_design_variable_rescaling(
        seed in 0u64..10_000,
        a in prop_oneof![-20.0..-0.05f64, 0.05..20.0f64],
        b in -5.0..5.0f64,
        k in 0usize..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dvs: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let feats: Vec<[f64; 4]> = dvs
            .iter()
            .map(|d| [d[0] + 0.1 * d[1], d[1] * d[1], rng.random::<f64>(), d[2] - d[0]])
            .collect();
        let rescaled: Vec<Vec<f64>> = dvs
            .iter()
            .map(|d| d.iter().enumerate().map(|(i, v)| if i == k { a * v + b } else { *v }).collect())
            .collect();
        let r1 = cmax_from_samples(&dvs, &feats);
        let r2 = cmax_from_samples(&rescaled, &feats);
        for (p, q) in r1.values.iter().zip(&r2.values) {
            let (p, q) = (p.unwrap(), q.unwrap());
            prop_assert!((p - q).abs() < 1e-9);
            prop_assert!(p <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mse_cdf_is_a_valid_distribution(values in prop::collection::vec(1e-9..1.0f64, 1..100)) {
        let cdf = empirical_cdf(&values, &log_grid(&values, 201));
        prop_assert_eq!(cdf.percent.len(), 201);
        prop_assert!(cdf.percent.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(cdf.percent.iter().all(|p| (0.0..=100.0).contains(p)));
        prop_assert_eq!(*cdf.percent.last().unwrap(), 100.0);
        prop_assert!(cdf.grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn naca_sections_decompose_cleanly(m in 0.0..0.08f64, p in 0.2..0.7f64, tc in 0.05..0.25f64) {
        let grid = cosine_grid();
        let s = naca::naca4_section(m, p, tc, &grid);
        let d = decompose(&s);
        let n = grid.len();
        // the closed-TE coefficients cancel only to rounding at x = 1
        prop_assert!(d.t.iter().all(|t| *t >= -1e-15));
        for v in [d.t[0], d.t[n - 1], d.c[0], d.c[n - 1]] {
            prop_assert!(v.abs() < 1e-15);
        }
        let back = d.recompose();
        prop_assert!(back.mse(&s) < 1e-30);
    }

    #[test]
    fn parsec_round_trips_when_well_conditioned(
        xu in 0.25..0.5f64,
        yu in 0.04..0.1f64,
        xl in 0.25..0.5f64,
        yl in -0.06..-0.02f64,
        ru in 0.005..0.02f64,
        rl in 0.003..0.015f64,
    ) {
        let v = ParsecVars {
            r_le_upper: ru,
            r_le_lower: rl,
            x_upper: xu,
            y_upper: yu,
            yxx_upper: -0.5,
            x_lower: xl,
            y_lower: yl,
            yxx_lower: 0.4,
            y_te: 0.0,
            dy_te: 0.002,
            alpha_te: -0.05,
            beta_te: 0.2,
        };
        let c = parsec_solve(&v).unwrap();
        let c2 = parsec_solve(&parsec_features(&c)).unwrap();
        for (a, b) in c.upper.iter().chain(&c.lower).zip(c2.upper.iter().chain(&c2.lower)) {
            prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
        }
    }

    #[test]
    fn ga_best_never_decreases_and_stays_in_bounds(
        seed in 0u64..1000,
        centre in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let bounds = vec![(-2.0, 2.0), (-1.0, 1.5), (0.0, 1.0)];
        let cfg = GaConfig { population: 12, generations: 15, seed, ..GaConfig::default() };
        let objective = |x: &[f64]| {
            let d: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum();
            // a hole in the landscape exercises the death penalty
            (d > 0.05 || x[0] < 0.0).then_some(-d)
        };
        let mut in_bounds = true;
        let h = ga_maximize_observed(&bounds, &cfg, objective, |g| {
            in_bounds &= g.individuals.iter().all(|x| x.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi));
        })
        .unwrap();
        prop_assert!(in_bounds);
        prop_assert!(h.best.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(h.best.len(), 15);
    }
}

/// The load-bearing guarantee, checked exhaustively rather than by shrinking.
#[test]
fn ten_thousand_random_latents_decode_to_non_negative_thickness() {
    let model = small_model(17);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let z: Vec<f64> = (0..model.latent_dim()).map(|_| rng.random_range(-4.0..4.0)).collect();
        let dec = model.decode(&z).unwrap();
        assert!(dec.tc.t.iter().all(|t| *t >= 0.0), "negative thickness at {z:?}");
    }
}

#[test]
fn ten_thousand_random_nets_keep_their_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = cosine_grid();
    for _ in 0..10_000 {
        for kind in [NetKind::Thickness, NetKind::Camber] {
            let v: Vec<f64> = (0..kind.free_len()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let net: RegulatedControlNet = realize_control_net(kind, &v).unwrap();
            assert!(net.check_invariants());
            if kind == NetKind::Thickness {
                assert!(net_to_distribution(&net, &grid).unwrap().values.iter().all(|t| *t >= 0.0));
            }
        }
    }
}
