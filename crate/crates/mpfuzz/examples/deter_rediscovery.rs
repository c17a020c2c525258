//! Full search of a six-slot legacy geth pool under a 0.2 cost bound,
//! grouped by the pattern each exploit matches.
//!
//! cargo run --release --example deter_rediscovery

use mpfuzz::fuzzer::{mpfuzz, pattern_counts, FuzzConfig};
use mpfuzz::oracle::{decimal, OracleConfig};
use mpfuzz::policy_preset;

fn main() {
    let policy = policy_preset("geth-legacy-reduced(6)").unwrap();
    let cfg = FuzzConfig {
        oracle: OracleConfig::with_epsilon(0.2),
        max_mutations: Some(100_000),
        ..FuzzConfig::default()
    };
    let r = mpfuzz(&policy, &cfg).unwrap();
    println!(
        "{} exploits, {} mutations, {} states, {:?}",
        r.exploits.len(),
        r.mutations,
        r.states_covered,
        r.termination
    );
    for (pattern, n) in pattern_counts(&r) {
        println!("  {pattern}: {n}");
    }
    for ex in r.exploits.iter().take(5) {
        println!("  {} -> {} asym={}", ex.symbol_sequence, ex.end_state, decimal(&ex.verdict.asym, 4));
    }
}
