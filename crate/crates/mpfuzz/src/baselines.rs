//! Reference fuzzers for the ablation study, measured in mutations to the
//! first exploit.
//!
//! * `B1` sends random transaction sequences to fresh pools, no feedback.
//! * `B2` appends one random concrete transaction per mutation and keeps
//!   states with an unseen concrete hash, scheduling seeds first-in first-out.
//! * `B3` is `B2` with seeds prioritized by their count of invalid transactions.
//! * `B4` is the symbolized fuzzer without the promising-ness feedback.

use std::collections::hash_map::DefaultHasher;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exploitkit::Exploit;
use crate::fuzzer::{mpfuzz, FuzzConfig, FuzzError};
use crate::mempool::{new_pool, MempoolError, MempoolPolicy, MempoolState};
use crate::oracle::{check_eviction, OracleConfig, OracleKind};
use crate::txmodel::{Address, Transaction, WorldState};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Mempool(#[from] MempoolError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Exploit(#[from] crate::exploitkit::ExploitError),
    #[error("unknown fuzzer `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Baseline {
    B1,
    B2,
    B3,
    B4,
    /// The full symbolized fuzzer, listed alongside for comparisons.
    Mpfuzz,
}

impl Baseline {
    pub const ALL: [Baseline; 5] =
        [Baseline::Mpfuzz, Baseline::B4, Baseline::B3, Baseline::B2, Baseline::B1];
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Baseline::Mpfuzz => write!(f, "mpfuzz"),
            other => fmt::Debug::fmt(other, f),
        }
    }
}

impl FromStr for Baseline {
    type Err = BaselineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| BaselineError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub oracle: OracleConfig,
    pub max_mutations: u64,
    pub rng_seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { oracle: OracleConfig::default(), max_mutations: 2_000_000, rng_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub baseline: Baseline,
    pub exploit: Option<Exploit>,
    pub mutations: u64,
    pub found: bool,
}

/// Concrete value grids shared by the random baselines: `m` adversarial
/// senders, nonces and values in `1..=m`, prices in `2..=m+1`.
#[derive(Debug, Clone, Copy)]
pub struct TxGrid {
    pub m: u64,
}

impl TxGrid {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Transaction {
        let m = self.m;
        Transaction::new(
            Address::adversarial(rng.gen_range(1..=m) as u32),
            rng.gen_range(1..=m),
            rng.gen_range(1..=m),
            rng.gen_range(1..=m) + 1,
        )
    }
}

/// Order-independent hash of the resident transactions.
pub fn state_hash(state: &MempoolState) -> u64 {
    let mut h = DefaultHasher::new();
    for t in state.txs() {
        t.hash(&mut h);
    }
    h.finish()
}

fn invalid_count(state: &MempoolState) -> usize {
    state.len() - state.executable().len()
}

struct Concrete {
    txs: Vec<Transaction>,
    state: MempoolState,
}

fn fresh(policy: &MempoolPolicy) -> Result<MempoolState, BaselineError> {
    let mut s = new_pool(policy.clone(), WorldState::new(policy.m()))?;
    s.fill_normal(policy.capacity)?;
    Ok(s)
}

fn found(
    baseline: Baseline,
    policy: &MempoolPolicy,
    txs: Vec<Transaction>,
    mutations: u64,
    cfg: &BaselineConfig,
) -> Result<BaselineReport, BaselineError> {
    let (ex, _) = Exploit::from_txs(policy, OracleKind::Eviction, None, txs, &cfg.oracle)?;
    Ok(BaselineReport { baseline, exploit: Some(ex), mutations, found: true })
}

fn run_b1(policy: &MempoolPolicy, cfg: &BaselineConfig) -> Result<BaselineReport, BaselineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let grid = TxGrid { m: policy.m() };
    let init = fresh(policy)?;
    let initial = init.txs();
    let len = 2 * policy.capacity;
    let mut mutations = 0;
    while mutations < cfg.max_mutations {
        let mut state = init.clone();
        let mut txs = Vec::with_capacity(len);
        for _ in 0..len {
            if mutations >= cfg.max_mutations {
                break;
            }
            let tx = grid.sample(&mut rng);
            txs.push(tx);
            mutations += 1;
            if state.admit(tx).admitted() && check_eviction(&initial, &state, &cfg.oracle).triggered {
                return found(Baseline::B1, policy, txs, mutations, cfg);
            }
        }
    }
    Ok(BaselineReport { baseline: Baseline::B1, exploit: None, mutations, found: false })
}

fn run_concrete(
    baseline: Baseline,
    policy: &MempoolPolicy,
    cfg: &BaselineConfig,
) -> Result<BaselineReport, BaselineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let grid = TxGrid { m: policy.m() };
    let init = fresh(policy)?;
    let initial = init.txs();
    let mut covered = HashSet::from([state_hash(&init)]);
    let mut corpus = vec![Concrete { txs: Vec::new(), state: init }];
    // B3 priority: most invalid txs, then least selected, then oldest
    let mut heap = BinaryHeap::from([(0usize, Reverse((0u64, 0usize)))]);
    let mut next = 0usize;
    let mut mutations = 0;
    while mutations < cfg.max_mutations {
        let idx = match baseline {
            Baseline::B3 => {
                let (inv, Reverse((sel, i))) = heap.pop().expect("corpus is never empty");
                heap.push((inv, Reverse((sel + 1, i))));
                i
            }
            _ => {
                next += 1;
                (next - 1) % corpus.len()
            }
        };
        {
            let tx = grid.sample(&mut rng);
            let mut state = corpus[idx].state.clone();
            mutations += 1;
            if !state.admit(tx).admitted() {
                continue;
            }
            let mut txs = corpus[idx].txs.clone();
            txs.push(tx);
            if check_eviction(&initial, &state, &cfg.oracle).triggered {
                return found(baseline, policy, txs, mutations, cfg);
            }
            if covered.insert(state_hash(&state)) {
                let invalid = invalid_count(&state);
                heap.push((invalid, Reverse((0, corpus.len()))));
                corpus.push(Concrete { txs, state });
            }
        }
    }
    Ok(BaselineReport { baseline, exploit: None, mutations, found: false })
}

fn run_symbolic(
    baseline: Baseline,
    policy: &MempoolPolicy,
    cfg: &BaselineConfig,
) -> Result<BaselineReport, BaselineError> {
    let fc = FuzzConfig {
        oracle: cfg.oracle.clone(),
        max_mutations: Some(cfg.max_mutations),
        rng_seed: cfg.rng_seed,
        stop_after_first: true,
        promising: baseline != Baseline::B4,
        ..FuzzConfig::default()
    };
    let r = mpfuzz(policy, &fc)?;
    let exploit = r.exploits.into_iter().next();
    Ok(BaselineReport {
        baseline,
        found: exploit.is_some(),
        mutations: r.first_exploit_at.unwrap_or(r.mutations),
        exploit,
    })
}

/// Runs one fuzzer until its first eviction exploit or the mutation cap.
pub fn run_baseline(
    kind: Baseline,
    policy: &MempoolPolicy,
    cfg: &BaselineConfig,
) -> Result<BaselineReport, BaselineError> {
    match kind {
        Baseline::B1 => run_b1(policy, cfg),
        Baseline::B2 | Baseline::B3 => run_concrete(kind, policy, cfg),
        Baseline::B4 | Baseline::Mpfuzz => run_symbolic(kind, policy, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareRow {
    pub baseline: String,
    pub preset: String,
    pub m: usize,
    pub rng_seed: u64,
    pub mutations_to_first: u64,
    pub found: bool,
}

/// Grid of mutations-to-first-exploit over fuzzers, presets and seeds.
pub fn compare(
    policies: &[MempoolPolicy],
    fuzzers: &[Baseline],
    seeds: &[u64],
    oracle: &OracleConfig,
    max_mutations: u64,
) -> Result<Vec<CompareRow>, BaselineError> {
    let mut rows = Vec::new();
    for p in policies {
        for b in fuzzers {
            for s in seeds {
                let cfg = BaselineConfig { oracle: oracle.clone(), max_mutations, rng_seed: *s };
                let r = run_baseline(*b, p, &cfg)?;
                rows.push(CompareRow {
                    baseline: b.to_string(),
                    preset: p.name.clone(),
                    m: p.capacity,
                    rng_seed: *s,
                    mutations_to_first: r.mutations,
                    found: r.found,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[CompareRow], w: W) -> Result<(), BaselineError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Median of the mutation counts, upper middle for even lengths.
pub fn median(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    v[v.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mempool::policy_preset;
    use crate::txmodel::Transaction;

    #[test]
    fn hash_ignores_insertion_order() {
        let p = policy_preset("geth-legacy-reduced(6)").unwrap();
        let a = Transaction::new(Address::adversarial(1), 7, 1, 10);
        let b = Transaction::new(Address::adversarial(2), 7, 1, 10);
        let mut x = fresh(&p).unwrap();
        let mut y = fresh(&p).unwrap();
        x.admit(a);
        x.admit(b);
        y.admit(b);
        y.admit(a);
        assert_eq!(state_hash(&x), state_hash(&y));
    }

    #[test]
    fn names_roundtrip() {
        for b in Baseline::ALL {
            assert_eq!(b.to_string().parse::<Baseline>().unwrap(), b);
        }
    }
}
