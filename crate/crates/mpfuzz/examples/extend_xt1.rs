//! Find an all-future exploit on six slots and extend it to the full
//! 6144-slot legacy geth pool.
//!
//! cargo run --release --example extend_xt1

use mpfuzz::exploitkit::{extend, Pattern};
use mpfuzz::fuzzer::{mpfuzz, FuzzConfig};
use mpfuzz::oracle::{classify_tp_fp, decimal, OracleConfig};
use mpfuzz::policy_preset;

fn main() {
    let oracle = OracleConfig::with_epsilon(0.2);
    let small = policy_preset("geth-legacy-reduced(6)").unwrap();
    let cfg = FuzzConfig { oracle: oracle.clone(), ..FuzzConfig::default() };
    let r = mpfuzz(&small, &cfg).unwrap();
    let short = r.exploits.iter().find(|e| e.pattern == Some(Pattern::XT1)).expect("XT1 at m=6");
    println!("short: {} -> {}", short.symbol_sequence, short.end_state);

    let full = policy_preset("geth-legacy").unwrap();
    let ext = extend(short, &full, &oracle).unwrap();
    println!(
        "extended: {} txs, end {}, asym={}, {:?}",
        ext.concrete_txs.len(),
        ext.end_state,
        decimal(&ext.verdict.asym, 6),
        classify_tp_fp(&short.verdict, &ext.verdict, &oracle)
    );
}
