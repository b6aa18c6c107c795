use breakscan::breaktest::{scan, wald_at, wald_ivx_at, wald_ols_at, ScanConfig, StatisticKind, TestOptions};
use breakscan::dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw, Sample};
use breakscan::ivx::{build_instruments, IvxConfig};
use breakscan::kernels::Mat;
use breakscan::rng::replicate_stream;
use rand::seq::SliceRandom;
use rand::Rng;

fn simulated(t: usize, gamma: f64, c: f64, seed: u64, index: u64) -> Sample {
    let law = RegressorLaw { gamma, c: vec![c], innovations: InnovationLaw::standard(1) };
    simulate_sample(&BreakDgp::null(law, t, vec![0.2]), &mut replicate_stream(seed, index)).unwrap()
}

fn rescaled(s: &Sample, a: f64, b: f64) -> Sample {
    let y = s.y.iter().map(|v| a * v).collect();
    Sample::from_observations(y, s.x.scale(b)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn statistics_are_invariant_to_rescaling() {
    let cfg = IvxConfig::default();
    let mut rng = replicate_stream(11, 0);
    for i in 0..200 {
        let t = rng.random_range(50..=200);
        let gamma = if i % 2 == 0 { 1.0 } else { 0.5 };
        let s = simulated(t, gamma, 2.0, 5, i);
        let k = t / 2;
        let intercept = i % 3 == 0;
        let (a, b) = (rng.random_range(-4.0..4.0), rng.random_range(0.1..5.0));
        let s2 = rescaled(&s, a, b);
        let ols = wald_ols_at(&s, k, intercept).unwrap();
        assert!(rel(wald_ols_at(&s2, k, intercept).unwrap(), ols) < 1e-9);
        let ivx = wald_ivx_at(&s, &build_instruments(&s.x, &cfg), k, intercept).unwrap();
        let ivx2 = wald_ivx_at(&s2, &build_instruments(&s2.x, &cfg), k, intercept).unwrap();
        assert!(rel(ivx2, ivx) < 1e-9);
    }
}

#[test]
fn instrument_equal_to_regressor_reduces_to_ols() {
    for i in 0..50 {
        let s = simulated(120, 1.0, 1.0, 8, i);
        for intercept in [false, true] {
            assert_eq!(wald_ivx_at(&s, &s.x, 40, intercept).unwrap(), wald_ols_at(&s, 40, intercept).unwrap());
        }
    }
}

#[test]
fn statistic_depends_only_on_regime_moments() {
    let mut rng = replicate_stream(3, 99);
    for i in 0..30 {
        let s = simulated(150, 1.0, 3.0, 4, i);
        let z = build_instruments(&s.x, &IvxConfig::default());
        let k = 60;
        let mut order: Vec<usize> = (0..150).collect();
        order[..k].shuffle(&mut rng);
        order[k..].shuffle(&mut rng);
        let y: Vec<f64> = order.iter().map(|&r| s.y[r]).collect();
        let x = Mat::from_rows(&order.iter().map(|&r| s.x.row(r).to_vec()).collect::<Vec<_>>());
        let zp = Mat::from_rows(&order.iter().map(|&r| z.row(r).to_vec()).collect::<Vec<_>>());
        let p = Sample::from_observations(y, x).unwrap();
        let opts = TestOptions::new(true);
        assert!(rel(wald_at(&p, None, k, &opts).unwrap(), wald_at(&s, None, k, &opts).unwrap()) < 1e-10);
        assert!(rel(wald_at(&p, Some(&zp), k, &opts).unwrap(), wald_at(&s, Some(&z), k, &opts).unwrap()) < 1e-10);
    }
}

#[test]
fn widening_trimming_never_lowers_the_sup() {
    for i in 0..20 {
        let s = simulated(200, 1.0, 1.0, 21, i);
        for kind in [StatisticKind::WaldOls, StatisticKind::WaldIvx] {
            let narrow = scan(&s, &ScanConfig::new(kind).with_trimming(0.3, 0.7)).unwrap();
            let wide = scan(&s, &ScanConfig::new(kind).with_trimming(0.15, 0.85)).unwrap();
            let widest = scan(&s, &ScanConfig::new(kind).with_trimming(0.05, 0.95)).unwrap();
            assert!(narrow.sup_value <= wide.sup_value && wide.sup_value <= widest.sup_value);
        }
    }
}

#[test]
fn scan_matches_exhaustive_evaluation_on_a_coarse_grid() {
    let s = simulated(100, 1.0, 1.0, 77, 0);
    for kind in [StatisticKind::WaldOls, StatisticKind::WaldIvx] {
        let mut cfg = ScanConfig::new(kind);
        cfg.step = Some(0.01);
        let sc = scan(&s, &cfg).unwrap();
        let z = cfg.resolved_ivx().map(|c| build_instruments(&s.x, &c));
        let brute = (15..=85)
            .map(|k| wald_at(&s, z.as_ref(), k, &cfg.options()).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(rel(sc.sup_value, brute) < 1e-10);
        assert!(sc.stats.iter().all(|v| *v <= sc.sup_value));
    }
}
