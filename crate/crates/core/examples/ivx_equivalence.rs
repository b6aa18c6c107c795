//! IVX instruments, and the two equivalent forms of the IVX Wald statistic.

use breakscan::breaktest::{wald_ivx_at, wald_ivx_simplified, wald_ols_at};
use breakscan::dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw};
use breakscan::ivx::{build_instruments, IvxConfig};
use breakscan::rng::replicate_stream;

fn main() {
    let law = RegressorLaw { gamma: 1.0, c: vec![0.5], innovations: InnovationLaw::standard(1) };
    let sample = simulate_sample(&BreakDgp::null(law, 300, vec![0.1]), &mut replicate_stream(11, 0)).unwrap();
    let cfg = IvxConfig::default();
    let z = build_instruments(&sample.x, &cfg);
    println!("instrument root for T = 300: {:.5}", cfg.root(300));

    let k = 120;
    let matrix = wald_ivx_at(&sample, &z, k, false).unwrap();
    let simple = wald_ivx_simplified(&sample, &z, k).unwrap();
    println!("matrix form {matrix:.10}, w-form {simple:.10}");

    let ols = wald_ols_at(&sample, k, false).unwrap();
    let as_ivx = wald_ivx_at(&sample, &sample.x, k, false).unwrap();
    println!("OLS {ols:.10}, IVX with z = x {as_ivx:.10}");
}
