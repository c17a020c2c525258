//! The three-slot case study: fuzz a tiny geth-1.11 pool with a near-zero
//! cost bound and print the seed trace up to the first exploit.
//!
//! cargo run --example case_study

use mpfuzz::fuzzer::{mpfuzz, FuzzConfig};
use mpfuzz::oracle::{decimal, OracleConfig};
use mpfuzz::policy_preset;

fn main() {
    let policy = policy_preset("geth-1.11-reduced(3,1,2,2)").unwrap();
    let cfg = FuzzConfig {
        oracle: OracleConfig::with_epsilon(0.0001),
        alphabet: "PCO".parse().unwrap(),
        max_mutations: Some(1000),
        stop_after_first: true,
        ..FuzzConfig::default()
    };
    let r = mpfuzz(&policy, &cfg).unwrap();
    println!("corpus insertions: {}", r.corpus_trace.join(" "));
    for ex in &r.exploits {
        println!(
            "exploit {} -> {} asym={} pattern={:?} at mutation {}",
            ex.symbol_sequence,
            ex.end_state,
            decimal(&ex.verdict.asym, 4),
            ex.pattern,
            r.first_exploit_at.unwrap_or_default()
        );
        for tx in &ex.concrete_txs {
            println!("  {tx}");
        }
    }
}
