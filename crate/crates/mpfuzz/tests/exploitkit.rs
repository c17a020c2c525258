//! Pattern generation, extension and replay across presets.

use mpfuzz::exploitkit::{
    dedup, evaluate_xt, extend, matrix_policy, replay, simulate_xt8a, Exploit, ExploitError,
    Pattern, WorkloadSpec, XtParams,
};
use mpfuzz::fuzzer::{mpfuzz, FuzzConfig};
use mpfuzz::oracle::{OracleConfig, OracleKind};
use mpfuzz::policy_preset;
use mpfuzz::symbolic::Symbol;

fn eval(p: Pattern, base: &str) -> Exploit {
    evaluate_xt(p, &matrix_policy(base).unwrap(), &XtParams::default(), &OracleConfig::default())
        .unwrap()
        .0
}

#[test]
fn end_states_have_the_documented_shape() {
    assert_eq!(eval(Pattern::XT1, "geth-legacy").end_state, "FFFFFFFFFFFFFFFF");
    let xt6 = eval(Pattern::XT6, "geth-1.11");
    assert!(xt6.end_state.starts_with("FFF"), "{}", xt6.end_state);
    assert!(!xt6.end_state.contains('N'));
    let xt7 = eval(Pattern::XT7, "nethermind-legacy");
    assert!(!xt7.end_state.contains('N'));
    let xt9 = eval(Pattern::XT9, "openethereum");
    assert!(xt9.verdict.triggered && xt9.kind == OracleKind::Locking);
}

#[test]
fn exploit_files_roundtrip_and_reject_other_versions() {
    let ex = eval(Pattern::XT4, "geth-legacy");
    let back = Exploit::from_json(&ex.to_json()).unwrap();
    assert_eq!(back, ex);
    assert!(back.verify(&OracleConfig::default()).unwrap());
    let bumped = ex.to_json().replacen("\"version\": 1", "\"version\": 99", 1);
    assert!(matches!(Exploit::from_json(&bumped), Err(ExploitError::Schema(_))));
    assert!(matches!(Exploit::from_json("{}"), Err(ExploitError::Schema(_))));
}

#[test]
fn extension_to_a_patched_pool_reports_the_divergence() {
    let short = eval(Pattern::XT3, "geth-legacy");
    let target = policy_preset("geth-legacy-reduced(16,16,8,0)").unwrap();
    match extend(&short, &target, &OracleConfig::default()) {
        Err(ExploitError::ExtensionFailed { trace }) => {
            assert_eq!(trace.pattern, Some(Pattern::XT3));
            assert!(!trace.divergence.is_empty());
        }
        other => panic!("expected a divergence, got {other:?}"),
    }
    let same = extend(&short, &short.mut_config, &OracleConfig::default()).unwrap();
    assert_eq!(same, short);
}

#[test]
fn extension_scales_xt2_to_a_larger_pool() {
    let short = eval(Pattern::XT2, "geth-legacy");
    let target = policy_preset("geth-legacy-reduced(64,64,16,52)").unwrap();
    let ext = extend(&short, &target, &OracleConfig::default()).unwrap();
    assert!(ext.verdict.triggered);
    assert_eq!(ext.mut_config.capacity, 64);
}

#[test]
fn replay_measures_removed_benign_fees() {
    let policy = matrix_policy("geth-legacy").unwrap();
    let w = WorkloadSpec::default();
    let none = replay(None, &policy, &w, 10, 0.0).unwrap();
    assert_eq!(none.success_rate, 0.0);
    assert!(none.benign_fees_per_block > 0.0);
    let xt1 = eval(Pattern::XT1, "geth-legacy");
    let r = replay(Some(&xt1), &policy, &w, 10, 0.0).unwrap();
    assert_eq!(r.success_rate, 1.0);
    assert_eq!(r.cost_per_block, 0.0);
    let lock = eval(Pattern::XT8, "reth-fifo");
    let r = replay(Some(&lock), &matrix_policy("reth-fifo").unwrap(), &w, 20, 0.0).unwrap();
    assert!(r.success_rate > 0.9);
    assert!(r.asym < 1.0);
}

#[test]
fn lock_is_infeasible_above_the_base_price() {
    let policy = matrix_policy("reth-fifo").unwrap();
    let validator = matrix_policy("geth-legacy").unwrap();
    let r = simulate_xt8a(&policy, &validator, &WorkloadSpec::default(), 1_000_000_000_000_000, 5, 50_000_000_000_000, 10)
        .unwrap();
    assert!(!r.feasible);
    assert_eq!(r.lock_blocks, 0);
    assert!(r.reason.unwrap().contains("below base price"));
}

#[test]
fn locking_search_on_a_fifo_pool() {
    let policy = policy_preset("reth-fifo-reduced(6)").unwrap();
    let cfg = FuzzConfig {
        families: vec![OracleKind::Locking],
        max_mutations: Some(20_000),
        ..FuzzConfig::default()
    };
    let r = mpfuzz(&policy, &cfg).unwrap();
    let ex = r.exploits.iter().find(|e| e.kind == OracleKind::Locking).expect("a locking exploit");
    assert_eq!(ex.pattern, Some(Pattern::XT8));
    assert!(ex.verdict.asym_f64() < 0.46);
    assert!(ex.verify(&cfg.oracle).unwrap());
}

#[test]
fn fuzzer_exploits_replay_and_dedup() {
    let policy = policy_preset("geth-legacy-reduced(6)").unwrap();
    let cfg = FuzzConfig { oracle: OracleConfig::with_epsilon(0.2), ..FuzzConfig::default() };
    let r = mpfuzz(&policy, &cfg).unwrap();
    assert!(!r.exploits.is_empty());
    for e in &r.exploits {
        assert!(e.verify(&cfg.oracle).unwrap(), "{}", e.symbol_sequence);
        assert!(e.verdict.asym_f64() < 0.2);
        assert!(!e.end_state.contains(Symbol::N.as_char()));
    }
    let mut twice = r.exploits.clone();
    twice.extend(r.exploits.clone());
    assert_eq!(dedup(twice).len(), r.exploits.len());
}
