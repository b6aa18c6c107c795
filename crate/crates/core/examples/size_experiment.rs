//! Empirical size of the sup Wald-OLS test for a mildly integrated regressor.

use breakscan::breaktest::{ScanConfig, StatisticKind};
use breakscan::dgp::{BreakDgp, InnovationLaw, RegressorLaw};
use breakscan::harness::{run_size, CriticalSource, Experiment};
use breakscan::limitdist::{build_table, FunctionalSpec};

fn main() {
    let table = build_table(&FunctionalSpec::sup_nbb(1, 0.15, 0.85), 20_000, &[0.95], 3, false).unwrap();
    let law = RegressorLaw { gamma: 0.5, c: vec![1.0], innovations: InnovationLaw::standard(1) };
    let exp = Experiment {
        dgp: BreakDgp::null(law, 500, vec![0.0]),
        test: ScanConfig::new(StatisticKind::WaldOls),
        critical: CriticalSource::Table(table),
        level: 0.05,
        replications: 1000,
        master_seed: 42,
        keep_per_replicate: false,
    };
    let res = run_size(&exp).unwrap();
    println!(
        "size {:.3} (se {:.3}) at critical value {:.3}",
        res.rejection_rate, res.mc_stderr, res.critical_value
    );
    println!("{}", breakscan::harness::ExperimentResult::CSV_HEADER);
    println!("{}", res.csv_row("size"));
}
