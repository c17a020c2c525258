//! Property bodies shared by the property suite and the acceptance report.

use std::collections::BTreeSet;

use super::*;
use mpfuzz::fuzzer::{mpfuzz, FuzzConfig};
use mpfuzz::mempool::AdmissionOutcome;
use mpfuzz::oracle::{asym_d, asym_e, check_eviction, OracleConfig};
use mpfuzz::symbolic::{cost, opcost, symbolize_state, Group, Init, SymExec};
use mpfuzz::txmodel::{Address, Transaction};
use mpfuzz::{new_pool, WorldState};
use proptest::prelude::*;

pub type Property = (&'static str, fn() -> Result<(), String>);

pub const ALL: [Property; 6] = [
    ("symbolization equivalence", symbolization_equivalence),
    ("mempool trichotomy and capacity", trichotomy_and_capacity),
    ("asym scale invariance", asym_is_scale_invariant),
    ("opcost <= cost", opcost_never_exceeds_cost),
    ("run determinism", runs_are_deterministic),
    ("fuzz run determinism", fuzz_runs_are_deterministic),
];

fn init_of(b: bool) -> Init {
    if b {
        Init::Normal
    } else {
        Init::Empty
    }
}

fn walk_args() -> impl Strategy<Value = (usize, bool, Vec<u16>)> {
    (0..PRESETS.len(), any::<bool>(), prop::collection::vec(any::<u16>(), 0..14))
}

pub fn symbolization_equivalence() -> Result<(), String> {
    runner(1)
        .run(&(walk_args(), any::<u64>()), |((p, normal, choices), seed)| {
            let policy = preset(p);
            let init = init_of(normal);
            let ex = walk(policy.clone(), init, &choices);
            let mut other = start(&policy, init);
            let mut shape = Vec::new();
            for tx in reinstantiate(&ex, seed) {
                let out = other.admit(tx);
                shape.push((out.admitted(), out.evicted().len()));
            }
            let want: Vec<_> =
                ex.history.iter().map(|s| (s.outcome.admitted(), s.outcome.evicted().len())).collect();
            prop_assert_eq!(shape, want);
            let (a, b) = (ex.symbolized(), symbolize_state(&other));
            prop_assert_eq!(a.key(), b.key());
            let parents = |g: &[Group]| g.iter().map(|g| g.parent).collect::<Vec<_>>();
            prop_assert_eq!(parents(&a.groups), parents(&b.groups));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn trichotomy_and_capacity() -> Result<(), String> {
    let txs = prop::collection::vec((any::<u32>(), any::<u64>(), any::<u64>(), any::<u64>()), 1..40);
    runner(2)
        .run(&(0..PRESETS.len(), any::<bool>(), txs), |(p, normal, raw)| {
            let policy = preset(p);
            let m = policy.m();
            let mut s = start(&policy, init_of(normal));
            for (a, n, v, f) in raw {
                let tx = raw_tx(m, a, n, v, f);
                let before: BTreeSet<Transaction> = s.txs().into_iter().collect();
                let declined = s.declined.len();
                let out = s.admit(tx);
                let after: BTreeSet<Transaction> = s.txs().into_iter().collect();
                match &out {
                    AdmissionOutcome::Declined(_) => {
                        prop_assert_eq!(&after, &before);
                        prop_assert_eq!(s.declined.len(), declined + 1);
                        prop_assert_eq!(s.declined.last().map(|d| d.0), Some(tx));
                    }
                    AdmissionOutcome::AdmittedNoEvict => {
                        prop_assert!(!before.contains(&tx));
                        let mut want = before.clone();
                        want.insert(tx);
                        prop_assert_eq!(&after, &want);
                    }
                    AdmissionOutcome::AdmittedEvicting(v) => {
                        prop_assert!(!v.is_empty());
                        prop_assert!(after.contains(&tx));
                        let gone: BTreeSet<Transaction> = v.iter().copied().collect();
                        prop_assert_eq!(gone.len(), v.len());
                        prop_assert!(gone.is_subset(&before));
                        let mut want = before.clone();
                        want.insert(tx);
                        let want: BTreeSet<Transaction> = want.difference(&gone).copied().collect();
                        prop_assert_eq!(&after, &want);
                    }
                }
                prop_assert!(s.len() <= s.capacity());
                let futures = s.txs().iter().filter(|t| !s.is_connected(t)).count();
                prop_assert_eq!(s.future_count(), futures);
                prop_assert!(s.future_count() <= policy.future_quota);
                prop_assert_eq!(s.declined.len() - declined, usize::from(!out.admitted()));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn asym_is_scale_invariant() -> Result<(), String> {
    let txs = prop::collection::vec((any::<u32>(), any::<u64>(), any::<u64>(), any::<u64>()), 1..30);
    runner(3)
        .run(&(0..PRESETS.len(), 2..10_000u64, txs), |(p, k, raw)| {
            let policy = preset(p);
            let m = policy.m();
            let verdict = |scale: u64| {
                let mut s = new_pool(policy.clone(), WorldState::new(m)).unwrap();
                for i in 1..=policy.capacity as u32 {
                    s.admit(Transaction::new(Address::benign(i), 1, 1, 3 * scale));
                }
                let st0 = s.txs();
                for &(a, n, v, f) in &raw {
                    let mut tx = raw_tx(m, a, n, v, f);
                    tx.gas_price *= scale;
                    s.admit(tx);
                }
                let dcn: Vec<Transaction> = s.declined.iter().map(|d| d.0).collect();
                let d = asym_d(&mpfuzz::oracle::chargeable(&s), s.len(), &dcn).ok();
                (check_eviction(&st0, &s, &OracleConfig::default()), d)
            };
            let (base, d1) = verdict(1);
            let (scaled, dk) = verdict(k);
            prop_assert_eq!(base.asym, scaled.asym);
            prop_assert_eq!(base.triggered, scaled.triggered);
            prop_assert_eq!(d1, dk);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let prices = prop::collection::vec(1..1_000_000u64, 1..20);
    runner(4)
        .run(&(prices.clone(), prices, 1..1_000_000u64), |(a, b, k)| {
            let txs = |v: &[u64], s: u64| -> Vec<Transaction> {
                v.iter().map(|p| Transaction::new(Address::adversarial(1), 1, 1, p * s)).collect()
            };
            prop_assert_eq!(asym_e(&txs(&a, 1), &txs(&b, 1)).unwrap(), asym_e(&txs(&a, k), &txs(&b, k)).unwrap());
            prop_assert_eq!(
                asym_d(&txs(&a, 1), a.len(), &txs(&b, 1)).unwrap(),
                asym_d(&txs(&a, k), a.len(), &txs(&b, k)).unwrap()
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn opcost_never_exceeds_cost() -> Result<(), String> {
    runner(5)
        .run(&walk_args(), |(p, normal, choices)| {
            let policy = preset(p);
            let mut ex = SymExec::new(policy, init_of(normal)).unwrap();
            for step in walk(ex.state.policy.clone(), ex.init, &choices).history {
                ex.apply(step.sym).unwrap();
                let st = ex.symbolized();
                prop_assert!(opcost(&st) <= cost(&st), "{}: {} > {}", st, opcost(&st), cost(&st));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn runs_are_deterministic() -> Result<(), String> {
    runner(6)
        .run(&walk_args(), |(p, normal, choices)| {
            let policy = preset(p);
            let init = init_of(normal);
            let a = walk(policy.clone(), init, &choices);
            let b = walk(policy.clone(), init, &choices);
            let c = SymExec::replay(policy, init, &a.input()).unwrap();
            let ja = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(&ja, &serde_json::to_string(&b).unwrap());
            prop_assert_eq!(&ja, &serde_json::to_string(&c).unwrap());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn fuzz_runs_are_deterministic() -> Result<(), String> {
    runner(7)
        .run(&(0..PRESETS.len(), any::<u64>(), 0..40u64), |(p, seed, budget)| {
            let policy = preset(p);
            let cfg = FuzzConfig { max_mutations: Some(budget), rng_seed: seed, ..FuzzConfig::default() };
            let a = serde_json::to_string(&mpfuzz(&policy, &cfg).unwrap()).unwrap();
            let b = serde_json::to_string(&mpfuzz(&policy, &cfg).unwrap()).unwrap();
            let nc = FuzzConfig { cache: false, ..cfg };
            let c = serde_json::to_string(&mpfuzz(&policy, &nc).unwrap()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a, &c);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
