//! Power of the sup Wald-IVX test as the slope break grows.

use breakscan::breaktest::{ScanConfig, StatisticKind};
use breakscan::dgp::{BreakDgp, InnovationLaw, RegressorLaw};
use breakscan::harness::{run_power, CriticalSource, Experiment};
use breakscan::limitdist::{build_table, FunctionalSpec};

fn main() {
    let table = build_table(&FunctionalSpec::sup_nbb(1, 0.15, 0.85), 20_000, &[0.95], 5, false).unwrap();
    let law = RegressorLaw { gamma: 1.0, c: vec![1.0], innovations: InnovationLaw::standard(1) };
    for shift in [0.0, 0.02, 0.05, 0.1] {
        let exp = Experiment {
            dgp: BreakDgp { beta2: vec![shift], ..BreakDgp::null(law.clone(), 300, vec![0.0]) },
            test: ScanConfig::new(StatisticKind::WaldIvx),
            critical: CriticalSource::Table(table.clone()),
            level: 0.05,
            replications: 500,
            master_seed: 9,
            keep_per_replicate: false,
        };
        let res = run_power(&exp).unwrap();
        println!(
            "shift {shift:.2}: rejection {:.3}, mean argmax {:.3}",
            res.rejection_rate, res.mean_argmax_fraction
        );
    }
}
