//! Scans a simulated sample for a break with both statistics.

use breakscan::breaktest::{scan, ScanConfig, StatisticKind};
use breakscan::dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw};
use breakscan::rng::replicate_stream;

fn main() {
    let law = RegressorLaw { gamma: 1.0, c: vec![1.0], innovations: InnovationLaw::standard(1) };
    let dgp = BreakDgp { beta2: vec![0.3], pi0: 0.4, ..BreakDgp::null(law, 400, vec![0.0]) };
    let sample = simulate_sample(&dgp, &mut replicate_stream(7, 0)).unwrap();

    for kind in [StatisticKind::WaldOls, StatisticKind::WaldIvx] {
        let result = scan(&sample, &ScanConfig::new(kind)).unwrap();
        println!(
            "{kind:?}: sup W = {:.3} at k = {} (pi = {:.3}), {} grid points",
            result.sup_value,
            result.argmax_k,
            result.argmax_fraction,
            result.grid.len()
        );
    }
    println!("true break at k = {}", dgp.break_index());
}
