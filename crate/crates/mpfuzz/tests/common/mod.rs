//! Shared generators for the integration suites.

#![allow(dead_code)]

pub mod props;

use std::collections::BTreeMap;

use mpfuzz::mempool::{new_pool, policy_preset, MempoolPolicy, MempoolState};
use mpfuzz::symbolic::{Alphabet, Init, Symbol, SymExec, SymbolizedTx};
use mpfuzz::txmodel::{Address, Role, Transaction, WorldState};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 1000;

/// Small policies covering every eviction and turning rule.
pub const PRESETS: [&str; 10] = [
    "geth-legacy-reduced(6)",
    "geth-1.11-reduced(6)",
    "geth-1.11-reduced(3,1,2,2)",
    "geth-legacy-reduced(6,6,3,4)",
    "besu-legacy-reduced(6)",
    "besu-22.7-reduced(6)",
    "nethermind-legacy-reduced(6)",
    "nethermind-1.18-reduced(6)",
    "reth-fifo-reduced(6)",
    "openethereum-reduced(6)",
];

/// A runner with a fixed seed so every run draws the same cases.
pub fn runner(seed: u8) -> TestRunner {
    let cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

pub fn preset(i: usize) -> MempoolPolicy {
    policy_preset(PRESETS[i % PRESETS.len()]).unwrap()
}

/// Walks the symbolic mutation graph: each choice picks one feasible
/// mutation, or an N when it lands one past the end.
pub fn walk(policy: MempoolPolicy, init: Init, choices: &[u16]) -> SymExec {
    let mut ex = SymExec::new(policy, init).unwrap();
    let alphabet = Alphabet::all();
    for c in choices {
        let muts = ex.enumerate_mutations(&alphabet);
        let i = *c as usize % (muts.len() + 1);
        let sym = muts.get(i).copied().unwrap_or(SymbolizedTx::bare(Symbol::N));
        ex.apply(sym).unwrap();
    }
    ex
}

/// Another concrete instantiation of the same symbolized input: P prices
/// redrawn from `4..=m+3` keeping their rank order, adversarial addresses
/// renumbered keeping their order.
pub fn reinstantiate(ex: &SymExec, seed: u64) -> Vec<Transaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ex.m() as usize;
    let mut prices: Vec<u64> =
        sample(&mut rng, m, ex.registry.len()).into_iter().map(|i| 4 + i as u64).collect();
    prices.sort_unstable();
    let price_of: BTreeMap<Address, u64> =
        ex.registry.iter().copied().zip(prices).collect();
    let mut senders: Vec<u32> = ex
        .concrete_txs()
        .iter()
        .filter(|t| t.sender.role == Role::Adversarial)
        .map(|t| t.sender.index)
        .collect();
    senders.sort_unstable();
    senders.dedup();
    let mut next = 0u32;
    let renumber: BTreeMap<u32, u32> = senders
        .into_iter()
        .map(|i| {
            next += rng.gen_range(1..=1000);
            (i, next)
        })
        .collect();
    ex.history
        .iter()
        .map(|s| {
            let mut t = s.tx;
            if s.sym.symbol == Symbol::P {
                t.gas_price = price_of[&t.sender];
            }
            if t.sender.role == Role::Adversarial {
                t.sender = Address::adversarial(renumber[&t.sender.index]);
            }
            t
        })
        .collect()
}

/// Fresh pool in the timeline's starting condition.
pub fn start(policy: &MempoolPolicy, init: Init) -> MempoolState {
    let mut s = new_pool(policy.clone(), WorldState::new(policy.m())).unwrap();
    if init == Init::Normal {
        s.fill_normal(policy.capacity).unwrap();
    }
    s
}

/// Raw transaction from four small integers, spread over the edge cases
/// of every validity class.
pub fn raw_tx(m: u64, sender: u32, nonce: u64, value: u64, price: u64) -> Transaction {
    Transaction::new(
        Address::adversarial(sender % m as u32 + 1),
        nonce % (m + 2) + 1,
        value % (m + 2),
        price % (m + 6),
    )
}
