//! Drive the base price down with empty blocks, then lock a FIFO pool at
//! a price the attacker can now afford.
//!
//! cargo run --example xt8a_base_price

use mpfuzz::exploitkit::{matrix_policy, simulate_xt8a, WorkloadSpec};

fn main() {
    let policy = matrix_policy("reth-fifo").unwrap();
    let validator = matrix_policy("geth-legacy").unwrap();
    let bp0 = 1_000_000_000_000_000u128;
    let r = simulate_xt8a(&policy, &validator, &WorkloadSpec::default(), bp0, 35, 50_000_000_000_000, 40).unwrap();
    println!("feasible={} lock_start={} lock_blocks={}", r.feasible, r.lock_start, r.lock_blocks);
    for p in &r.series {
        println!(
            "block {:2} {:6} base {:>16} gas {:6} benign {:>14} adversarial {:>14}",
            p.block, p.phase, p.base_price, p.gas_used, p.benign_fees, p.adversarial_fees
        );
    }
    println!("closed form after 35 empty blocks: {:.0}", bp0 as f64 * 0.875f64.powi(35));
}
