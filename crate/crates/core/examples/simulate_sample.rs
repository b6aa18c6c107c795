//! Simulates a predictive regression with a slope break and prints the
//! first rows of the CSV export.

use breakscan::dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw};
use breakscan::rng::replicate_stream;

fn main() {
    let law = RegressorLaw {
        gamma: 1.0,
        c: vec![2.0],
        innovations: InnovationLaw { rho_uv: -0.9, ..InnovationLaw::standard(1) },
    };
    let dgp = BreakDgp { beta2: vec![0.4], pi0: 0.6, ..BreakDgp::null(law, 250, vec![0.0]) };
    let sample = simulate_sample(&dgp, &mut replicate_stream(2024, 0)).unwrap();

    println!("break index k = {}", dgp.break_index());
    for line in sample.to_csv().lines().take(6) {
        println!("{line}");
    }
    println!("... {} rows", sample.len());
}
