//! Simulated critical values for the sup bridge functional and a p-value.

use breakscan::limitdist::{build_table, p_value, FunctionalKind, FunctionalSpec};

fn main() {
    let levels = [0.90, 0.95, 0.99];
    let sup = build_table(&FunctionalSpec::sup_nbb(1, 0.15, 0.85), 20_000, &levels, 1, true).unwrap();
    let chi = build_table(&FunctionalSpec::new(FunctionalKind::ChiSq, 1), 20_000, &levels, 1, false).unwrap();

    println!("level  sup-bridge  chi2(1)");
    for (a, b) in sup.quantiles.iter().zip(&chi.quantiles) {
        println!("{:.2}   {:>9.3}  {:>7.3}", a.0, a.1, b.1);
    }
    let p = p_value(&sup, 9.0);
    println!("p-value of 9.0 under the sup bridge: {:.4}", p.value);
}
