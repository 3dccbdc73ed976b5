// dev probe: per-task falsification density for the typebased strategy on rbt
use crucible::harness::{gen_inputs, GenConfig};
use crucible::rng::Rng;
use crucible::schema::StrategyKind;
use crucible::workloads::{self, Verdict};
use std::time::Instant;

fn main() {
    let tasks = [
        ("InsertValidRBT", "rbt_insert_duplicate_entries"),
        ("InsertValidRBT", "rbt_insert_black_leaf"),
        ("InsertValidRBT", "rbt_balance_skip_ll"),
        ("InsertValidRBT", "rbt_balance_wrong_recolor"),
        ("InsertPostRBT", "rbt_insert_duplicate_entries"),
        ("InsertPostRBT", "rbt_insert_no_overwrite"),
        ("DeleteValidRBT", "rbt_delete_skip_rebalance"),
        ("DeleteValidRBT", "rbt_delete_no_redden"),
    ];
    for size in [10u64, 12, 14, 16, 18] {
        println!("=== size {size} ===");
        let config = GenConfig::new(size);
        for (property, mutant) in tasks {
            let sem = workloads::semantics_for(&[mutant.to_string()]).unwrap();
            let sig = workloads::property_signature(property).unwrap();
            let mut rng = Rng::new(97);
            let n = 400_000u64;
            let mut fails = 0u64;
            let t0 = Instant::now();
            for _ in 0..n {
                let inputs = gen_inputs(&mut rng, &config, StrategyKind::TypeBased, sig);
                if workloads::evaluate_property(property, &inputs, &sem).unwrap() == Verdict::Fail {
                    fails += 1;
                }
            }
            let dt = t0.elapsed().as_secs_f64();
            let rate = n as f64 / dt;
            let p = fails as f64 / n as f64;
            let b5 = rate * 5.0;
            let p_find = 1.0 - (1.0 - p).powf(b5);
            println!("  {property}/{mutant}: p={p:.2e} gens/s={rate:.0} P(find in 5s)={p_find:.3}");
        }
    }
}
