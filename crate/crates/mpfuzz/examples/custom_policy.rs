//! Build a policy by hand, check which patterns it resists, and fuzz it.
//!
//! cargo run --example custom_policy

use mpfuzz::exploitkit::{generate_xt, matrix_policy, run_timeline, Pattern, XtParams};
use mpfuzz::fuzzer::{mpfuzz, FuzzConfig};
use mpfuzz::mempool::MempoolPolicy;
use mpfuzz::oracle::OracleConfig;

fn main() {
    let base = matrix_policy("geth-legacy").unwrap();
    let hardened = MempoolPolicy {
        name: "geth-legacy-hardened".into(),
        replacement_overdraft_guard: true,
        futures_evict_pending: false,
        cumulative_balance_check: true,
        ..base.clone()
    };
    hardened.validate().unwrap();
    let cfg = OracleConfig::default();
    for p in [Pattern::XT1, Pattern::XT2, Pattern::XT3, Pattern::XT4, Pattern::XT5, Pattern::XT6] {
        let txs = generate_xt(p, &base, &XtParams::default()).unwrap();
        let before = run_timeline(&base, p.kind(), &txs, &cfg).unwrap().verdict;
        let after = run_timeline(&hardened, p.kind(), &txs, &cfg).unwrap().verdict;
        println!("{p}: legacy {:5} hardened {:5}", before.triggered, after.triggered);
    }
    let small = MempoolPolicy { capacity: 6, future_quota: 6, sender_limit: 3, sender_limit_threshold: 4, ..hardened };
    let r = mpfuzz(&small, &FuzzConfig { max_mutations: Some(20_000), ..FuzzConfig::default() }).unwrap();
    println!("fuzzing the six-slot hardened pool: {} exploits in {} mutations", r.exploits.len(), r.mutations);
    for ex in r.exploits.iter().take(3) {
        println!("  {} -> {} {:?}", ex.symbol_sequence, ex.end_state, ex.pattern);
    }
}
