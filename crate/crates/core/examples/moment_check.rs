//! Normalised sample moments against their limits.

use breakscan::dgp::{InnovationLaw, RegressorLaw};
use breakscan::harness::{run_moment_check, MomentOptions};
use breakscan::ivx::IvxConfig;

fn main() {
    for (gamma, ivx) in [(0.5, None), (1.0, Some(IvxConfig::new(0.75, 1.0).unwrap()))] {
        let law = RegressorLaw { gamma, c: vec![1.0], innovations: InnovationLaw::standard(1) };
        let opts = MomentOptions { ivx, oracle_replications: 5000, ..MomentOptions::default() };
        let report = run_moment_check(&law, 2000, 500, 1, &opts).unwrap();
        println!("gamma = {gamma}");
        for row in &report.rows {
            println!(
                "  {:<18} {:>8.4} ± {:.4}  limit {:>8.4}",
                row.name, row.empirical_mean, row.mc_stderr, row.target
            );
        }
    }
}
