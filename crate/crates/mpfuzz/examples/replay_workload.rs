//! Replay two patterns against a block-building workload and print the
//! per-block fee series.
//!
//! cargo run --example replay_workload

use mpfuzz::exploitkit::{evaluate_xt, matrix_policy, replay, Pattern, WorkloadSpec, XtParams};
use mpfuzz::oracle::OracleConfig;

fn main() {
    let w = WorkloadSpec::default();
    for (pattern, base) in [(Pattern::XT1, "geth-legacy"), (Pattern::XT8, "reth-fifo")] {
        let policy = matrix_policy(base).unwrap();
        let (ex, _) = evaluate_xt(pattern, &policy, &XtParams::default(), &OracleConfig::default()).unwrap();
        let r = replay(Some(&ex), &policy, &w, 8, 0.0).unwrap();
        println!(
            "{pattern} on {}: success={:.3} cost/block={:.0} benign/block={:.0}",
            policy.name, r.success_rate, r.cost_per_block, r.benign_fees_per_block
        );
        for p in &r.series {
            println!("  block {:2} gas {:6} benign {:8} adversarial {:8}", p.block, p.gas_used, p.benign_fees, p.adversarial_fees);
        }
    }
}
