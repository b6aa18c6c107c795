use breakscan::dgp::{InnovationLaw, RegressorLaw};
use breakscan::harness::{run_moment_check, MomentOptions};
use breakscan::ivx::IvxConfig;

/// Exact `E Σ_{t<T} x_t z̃_t / T^{1+δ}` for iid unit-variance shocks, from
/// the covariance recursion of `(x_t, z̃_t)`.
fn exact_instrument_moment(t: usize, c: f64, ivx: &IvxConfig) -> f64 {
    let a = 1.0 - c / t as f64;
    let r = ivx.root(t);
    let (mut vxx, mut vxz, mut sum) = (0.0, 0.0, 0.0);
    for _ in 1..t {
        vxz = a * r * vxz + a * (a - 1.0) * vxx + 1.0;
        vxx = a * a * vxx + 1.0;
        sum += vxz;
    }
    sum / (t as f64).powf(1.0 + ivx.delta)
}

fn lur_law(c: f64) -> RegressorLaw {
    RegressorLaw { gamma: 1.0, c: vec![c], innovations: InnovationLaw::standard(1) }
}

#[test]
fn regressor_instrument_moment_matches_exact_expectation() {
    let ivx = IvxConfig::new(0.75, 1.0).unwrap();
    let opts = MomentOptions { ivx: Some(ivx), ..MomentOptions::default() };
    let report = run_moment_check(&lur_law(1.0), 5000, 2000, 41, &opts).unwrap();
    let row = report.row("sum_x_ztilde[1]").unwrap();
    let exact = exact_instrument_moment(5000, 1.0, &ivx);
    assert!((row.empirical_mean - exact).abs() < 3.0 * row.mc_stderr, "{row:?} vs exact {exact}");
    println!("T = 5000: mean {:.4}, limit {:.4}, relative gap {:.3}", row.empirical_mean, row.target, row.relative_error);
}

#[test]
fn regressor_instrument_moment_approaches_euler_limit() {
    let ivx = IvxConfig::new(0.75, 1.0).unwrap();
    let opts = MomentOptions { ivx: Some(ivx), ..MomentOptions::default() };
    let report = run_moment_check(&lur_law(1.0), 20_000, 2000, 43, &opts).unwrap();
    let row = report.row("sum_x_ztilde[1]").unwrap();
    assert!(row.relative_error <= 0.15, "{row:?}");
    let exact_gap = |t| (row.target - exact_instrument_moment(t, 1.0, &ivx)) / row.target;
    assert!(exact_gap(100_000) < exact_gap(20_000) && exact_gap(20_000) < exact_gap(5000));
}

#[test]
fn local_to_unity_second_moments_match_ou_integrals() {
    let report = run_moment_check(&lur_law(2.0), 1000, 2000, 8, &MomentOptions::default()).unwrap();
    for row in &report.rows {
        assert!(row.relative_error <= 0.1, "{row:?}");
    }
}
