//! Mutations to the first eviction exploit for the symbolized fuzzer and
//! the four reference fuzzers, median over five seeds.
//!
//! cargo run --release --example baseline_compare

use mpfuzz::baselines::{compare, median, Baseline};
use mpfuzz::oracle::OracleConfig;
use mpfuzz::policy_preset;

fn main() {
    let seeds = [1, 2, 3, 4, 5];
    for name in ["geth-legacy-reduced(6)", "geth-1.11-reduced(6)"] {
        let p = policy_preset(name).unwrap();
        println!("{name}");
        for b in Baseline::ALL {
            let rows = compare(std::slice::from_ref(&p), &[b], &seeds, &OracleConfig::default(), 200_000).unwrap();
            let found = rows.iter().filter(|r| r.found).count();
            let med = median(rows.iter().map(|r| r.mutations_to_first).collect());
            println!("  {:7} median {med:7} found {found}/5", b.to_string());
        }
    }
}
