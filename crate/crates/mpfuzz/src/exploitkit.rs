//! Named attack patterns, exploit records, extension to full-size pools and
//! replay under a block-building workload.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mempool::{
    new_pool, AdmissionOutcome, EvictionRule, MempoolError, MempoolPolicy, MempoolState,
};
use crate::oracle::{check_eviction, check_locking, OracleConfig, OracleKind, OracleVerdict};
use crate::symbolic::{symbolize_state, symbolize_tx, Symbol, SymExec, NORMAL_PRICE};
use crate::txmodel::{fee, Address, Transaction, WorldState, GAS};

pub const EXPLOIT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExploitError {
    #[error(transparent)]
    Mempool(#[from] MempoolError),
    #[error("pattern {0} cannot be instantiated: {1}")]
    Incompatible(Pattern, String),
    #[error("extension failed at {}", .trace.divergence)]
    ExtensionFailed { trace: DivergenceTrace },
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("exploit file: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pattern {
    XT1,
    XT2,
    XT3,
    XT4,
    XT5,
    XT6,
    XT7,
    XT8,
    XT9,
}

impl Pattern {
    pub const ALL: [Pattern; 9] = [
        Pattern::XT1,
        Pattern::XT2,
        Pattern::XT3,
        Pattern::XT4,
        Pattern::XT5,
        Pattern::XT6,
        Pattern::XT7,
        Pattern::XT8,
        Pattern::XT9,
    ];

    pub fn kind(self) -> OracleKind {
        match self {
            Pattern::XT8 | Pattern::XT9 => OracleKind::Locking,
            _ => OracleKind::Eviction,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Pattern {
    type Err = ExploitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| ExploitError::UnknownPattern(s.to_string()))
    }
}

/// Knobs for [`generate_xt`]; `None` fields take policy-derived defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct XtParams {
    /// Number of attacking sequences.
    pub k: Option<usize>,
    /// Transactions per sequence.
    pub l: Option<usize>,
    /// Parent price `f1`.
    pub low_price: Option<u64>,
    /// Child price `f2`.
    pub high_price: Option<u64>,
    /// Per-step counts for XT6.
    pub steps: Option<[usize; 4]>,
}

/// Sequences needed to cover the pool when each sender may hold `l` txs.
fn per_sender(policy: &MempoolPolicy) -> usize {
    policy.sender_limit.min(policy.capacity).max(1)
}

/// Default four-step schedule for XT6: `(m/py2)·py2, py1/py2 + 1, py3, 1`.
pub fn xt6_steps(policy: &MempoolPolicy) -> [usize; 4] {
    let py2 = per_sender(policy);
    [
        policy.capacity / py2 * py2,
        policy.future_quota / py2 + 1,
        policy.sender_limit_threshold,
        1,
    ]
}

struct Senders(u32);

impl Senders {
    fn next(&mut self) -> Address {
        self.0 += 1;
        Address::adversarial(self.0)
    }
}

/// Builds the documented transaction schedule of `pattern` for `policy`.
///
/// Eviction patterns assume a pool pre-filled with `m` normal transactions;
/// locking patterns assume an empty pool followed by benign probes.
pub fn generate_xt(
    pattern: Pattern,
    policy: &MempoolPolicy,
    params: &XtParams,
) -> Result<Vec<Transaction>, ExploitError> {
    let m = policy.capacity;
    let bal = policy.m();
    let hi = params.high_price.unwrap_or(bal + 4);
    let lo = params.low_price.unwrap_or(NORMAL_PRICE + 1);
    let py2 = per_sender(policy);
    let mut ids = Senders(0);
    let mut out = Vec::new();
    let incompatible = |why: &str| Err(ExploitError::Incompatible(pattern, why.to_string()));
    if m < 2 {
        return incompatible("pool too small");
    }
    match pattern {
        Pattern::XT1 => {
            for _ in 0..params.k.unwrap_or(m) {
                out.push(Transaction::new(ids.next(), bal + 1, 1, hi));
            }
        }
        Pattern::XT2 => {
            let l = params.l.unwrap_or(py2).max(2);
            let k = params.k.unwrap_or(m.div_ceil(l));
            for _ in 0..k {
                let a = ids.next();
                out.push(Transaction::new(a, 1, 1, lo));
                for n in 2..=l as u64 {
                    out.push(Transaction::new(a, n, bal, hi));
                }
            }
        }
        Pattern::XT3 => {
            if params.l.is_none() && policy.sender_limit_threshold < 2 {
                return incompatible("needs a sender limit threshold of at least 2");
            }
            let l = params.l.unwrap_or(policy.sender_limit_threshold).min(m);
            let f = params.k.unwrap_or(m - l);
            for _ in 0..f {
                out.push(Transaction::new(ids.next(), bal + 1, 1, hi));
            }
            let a = ids.next();
            out.push(Transaction::new(a, 1, 1, lo));
            for n in 2..=l as u64 {
                out.push(Transaction::new(a, n, bal, hi));
            }
        }
        Pattern::XT4 => {
            let l = params.l.unwrap_or(py2).max(2);
            let k = params.k.unwrap_or(m.div_ceil(l));
            // v1 + v2 must exceed the balance while v1 alone does not
            let child = ((bal - 1) / (l as u64 - 1)).max(1);
            let v1 = bal - child + 1;
            let senders: Vec<Address> = (0..k).map(|_| ids.next()).collect();
            for a in &senders {
                out.push(Transaction::new(*a, 1, 1, lo));
                for n in 2..=l as u64 {
                    out.push(Transaction::new(*a, n, child, hi));
                }
            }
            for a in &senders {
                out.push(Transaction::new(*a, 1, v1, lo + 1));
            }
        }
        Pattern::XT5 => {
            let l = params.l.unwrap_or(py2).max(2);
            let k = params.k.unwrap_or(m.div_ceil(l));
            for _ in 0..k {
                let a = ids.next();
                out.push(Transaction::new(a, 1, 1, lo));
                for n in 2..=l as u64 {
                    out.push(Transaction::new(a, n, 1, hi));
                }
            }
            for _ in 0..k {
                out.push(Transaction::new(ids.next(), 1, 1, lo + 1));
            }
        }
        Pattern::XT6 => {
            let [s1, s2, s3, s4] = params.steps.unwrap_or_else(|| xt6_steps(policy));
            let mut left = s1;
            while left > 0 {
                let a = ids.next();
                let len = left.min(py2);
                out.push(Transaction::new(a, 1, 1, lo));
                for n in 2..=len as u64 {
                    out.push(Transaction::new(a, n, 1, hi));
                }
                left -= len;
            }
            for _ in 0..s2 {
                out.push(Transaction::new(ids.next(), 1, 1, lo + 1));
            }
            if s3 > 0 {
                let a = ids.next();
                out.push(Transaction::new(a, 1, 1, lo + 1));
                for n in 2..=s3 as u64 {
                    out.push(Transaction::new(a, n, 1, hi));
                }
            }
            for _ in 0..s4 {
                out.push(Transaction::new(ids.next(), 1, 1, lo + 2));
            }
        }
        Pattern::XT7 => {
            let l = params.l.unwrap_or(m).max(2);
            let k = params.k.unwrap_or(m.div_ceil(l));
            let f1 = params.low_price.unwrap_or(0);
            let senders: Vec<Address> = (0..k).map(|_| ids.next()).collect();
            for a in &senders {
                // children first (as futures) so the cheap parent lands last
                for n in 2..=l as u64 {
                    out.push(Transaction::new(*a, n, 1, hi));
                }
                out.push(Transaction::new(*a, 1, 1, f1));
            }
            for _ in 0..k * (l - 1) {
                out.push(Transaction::new(ids.next(), 1, 1, f1 + 1));
            }
        }
        Pattern::XT8 => {
            let price = params.low_price.unwrap_or(1);
            for _ in 0..params.k.unwrap_or(m) {
                out.push(Transaction::new(ids.next(), 1, 1, price));
            }
        }
        Pattern::XT9 => {
            let l = params.l.unwrap_or(py2).max(2);
            let k = params.k.unwrap_or(m.div_ceil(l));
            let f1 = params.low_price.unwrap_or(1);
            let top = params.high_price.unwrap_or(NORMAL_PRICE + 1);
            for _ in 0..k {
                let a = ids.next();
                for n in 1..l as u64 {
                    out.push(Transaction::new(a, n, 1, f1));
                }
                out.push(Transaction::new(a, l as u64, 1, top));
            }
        }
    }
    Ok(out)
}

/// Result of running a concrete schedule through the oracle timeline.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub initial: Vec<Transaction>,
    pub state: MempoolState,
    pub outcomes: Vec<AdmissionOutcome>,
    pub declined_probes: Vec<Transaction>,
    pub verdict: OracleVerdict,
}

/// Runs `txs` from the oracle-specific initial state and checks the oracle.
pub fn run_timeline(
    policy: &MempoolPolicy,
    kind: OracleKind,
    txs: &[Transaction],
    cfg: &OracleConfig,
) -> Result<Timeline, ExploitError> {
    let mut state = new_pool(policy.clone(), WorldState::new(policy.m()))?;
    if kind == OracleKind::Eviction {
        state.fill_normal(policy.capacity)?;
    }
    let initial = state.txs();
    let outcomes: Vec<AdmissionOutcome> = txs.iter().map(|t| state.admit(*t)).collect();
    let (state, declined_probes, verdict) = match kind {
        OracleKind::Eviction => {
            let v = check_eviction(&initial, &state, cfg);
            (state, Vec::new(), v)
        }
        OracleKind::Locking => {
            let (probed, dcn) = probe(&state, cfg.probes.unwrap_or(policy.capacity));
            let v = check_locking(&probed, &dcn, cfg);
            (probed, dcn, v)
        }
    };
    Ok(Timeline { initial, state, outcomes, declined_probes, verdict })
}

/// Sends `n` normal transactions to a copy of the pool; returns the copy
/// and the probes it declined.
pub fn probe(state: &MempoolState, n: usize) -> (MempoolState, Vec<Transaction>) {
    let mut s = state.clone();
    let mut declined = Vec::new();
    for _ in 0..n {
        let tx = s.next_normal_tx(NORMAL_PRICE);
        if !s.admit(tx).admitted() {
            declined.push(tx);
        }
    }
    (s, declined)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exploit {
    pub version: u32,
    pub kind: OracleKind,
    pub pattern: Option<Pattern>,
    pub mut_config: MempoolPolicy,
    pub symbol_sequence: String,
    pub concrete_txs: Vec<Transaction>,
    pub verdict: OracleVerdict,
    pub end_state: String,
}

impl Exploit {
    /// Builds an exploit record from a concrete schedule.
    pub fn from_txs(
        policy: &MempoolPolicy,
        kind: OracleKind,
        pattern: Option<Pattern>,
        txs: Vec<Transaction>,
        cfg: &OracleConfig,
    ) -> Result<(Exploit, Timeline), ExploitError> {
        let tl = run_timeline(policy, kind, &txs, cfg)?;
        let symbol_sequence = arrival_symbols(policy, kind, &txs)?;
        let ex = Exploit {
            version: EXPLOIT_VERSION,
            kind,
            pattern,
            mut_config: policy.clone(),
            symbol_sequence,
            concrete_txs: txs,
            verdict: tl.verdict.clone(),
            end_state: end_state_string(&tl.state, kind),
        };
        Ok((ex, tl))
    }

    /// Builds an exploit record from a fuzzer context.
    pub fn from_exec(ex: &SymExec, kind: OracleKind, verdict: OracleVerdict) -> Exploit {
        let end = match kind {
            OracleKind::Eviction => ex.symbolized().key(),
            OracleKind::Locking => symbolize_state(&ex.state).key(),
        };
        Exploit {
            version: EXPLOIT_VERSION,
            kind,
            pattern: label_pattern(ex, kind),
            mut_config: ex.state.policy.clone(),
            symbol_sequence: ex.input().to_string(),
            concrete_txs: ex.concrete_txs(),
            verdict,
            end_state: end,
        }
    }

    /// Re-runs the concrete schedule on a fresh pool and compares verdicts.
    pub fn verify(&self, cfg: &OracleConfig) -> Result<bool, ExploitError> {
        let tl = run_timeline(&self.mut_config, self.kind, &self.concrete_txs, cfg)?;
        Ok(tl.verdict == self.verdict)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("exploit serializes")
    }

    pub fn from_json(s: &str) -> Result<Exploit, ExploitError> {
        let ex: Exploit =
            serde_json::from_str(s).map_err(|e| ExploitError::Schema(e.to_string()))?;
        if ex.version != EXPLOIT_VERSION {
            return Err(ExploitError::Schema(format!("unsupported version {}", ex.version)));
        }
        Ok(ex)
    }
}

fn end_state_string(state: &MempoolState, kind: OracleKind) -> String {
    let key = symbolize_state(state).key();
    if kind == OracleKind::Eviction && key.len() > 64 {
        compress(&key)
    } else {
        key
    }
}

/// Run-length form for long symbol strings, e.g. `F6144`.
fn compress(s: &str) -> String {
    let mut out = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        let mut n = 1;
        while chars.peek() == Some(&c) {
            chars.next();
            n += 1;
        }
        out.push(c);
        if n > 1 {
            out.push_str(&n.to_string());
        }
    }
    out
}

/// Symbol of every arriving transaction in its arrival context.
fn arrival_symbols(
    policy: &MempoolPolicy,
    kind: OracleKind,
    txs: &[Transaction],
) -> Result<String, ExploitError> {
    let mut s = new_pool(policy.clone(), WorldState::new(policy.m()))?;
    if kind == OracleKind::Eviction {
        s.fill_normal(policy.capacity)?;
    }
    let mut out = String::with_capacity(txs.len() * 2);
    for t in txs {
        let sym = symbolize_tx(t, &s);
        if !out.is_empty() {
            out.push(' ');
        }
        out.push(sym.as_char());
        s.admit(*t);
    }
    Ok(compress_words(&out))
}

fn compress_words(s: &str) -> String {
    let words: Vec<&str> = s.split(' ').collect();
    if words.len() <= 64 {
        return s.to_string();
    }
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let mut j = i;
        while j < words.len() && words[j] == words[i] {
            j += 1;
        }
        out.push(if j - i > 1 { format!("{}*{}", words[i], j - i) } else { words[i].to_string() });
        i = j;
    }
    out.join(" ")
}

/// Names the pattern a fuzzer-found exploit instantiates, if any.
pub fn label_pattern(ex: &SymExec, kind: OracleKind) -> Option<Pattern> {
    let policy = &ex.state.policy;
    if kind == OracleKind::Locking {
        return match policy.eviction_rule {
            EvictionRule::PriceChildlessOnly => Some(Pattern::XT9),
            _ => Some(Pattern::XT8),
        };
    }
    let sent: BTreeSet<Symbol> = ex.history.iter().map(|s| s.sym.symbol).collect();
    if !sent.is_empty() && sent.iter().all(|s| *s == Symbol::F) {
        return Some(Pattern::XT1);
    }
    let end = ex.symbolized();
    if end.count(Symbol::L) > 0 {
        return Some(if end.count(Symbol::F) > 0 { Pattern::XT3 } else { Pattern::XT2 });
    }
    if end.count(Symbol::R) > 0 {
        return Some(Pattern::XT4);
    }
    let mut turns = 0;
    let mut reversal = false;
    for step in &ex.history {
        for v in step.outcome.evicted() {
            if v.sender.is_benign() {
                continue;
            }
            if v.nonce == 1 && v.sender != step.tx.sender && step.sym.symbol != Symbol::R {
                turns += 1;
            }
            if v.nonce > 1 && v.gas_price > step.tx.gas_price {
                reversal = true;
            }
            if v.nonce == 1 && v.sender == step.tx.sender {
                turns += 1;
            }
        }
    }
    if reversal && policy.eviction_rule == EvictionRule::AccountMinPrice {
        return Some(Pattern::XT7);
    }
    match turns {
        0 => None,
        1 => Some(Pattern::XT5),
        _ => Some(Pattern::XT6),
    }
}

/// Unique by symbol sequence, first occurrence kept.
pub fn dedup(exploits: Vec<Exploit>) -> Vec<Exploit> {
    let mut seen = BTreeSet::new();
    exploits
        .into_iter()
        .filter(|e| seen.insert((e.kind, e.symbol_sequence.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceTrace {
    pub pattern: Option<Pattern>,
    pub target: String,
    pub divergence: String,
    pub events: Vec<String>,
}

/// Admission-event class of one outcome, used to compare short and
/// extended timelines.
fn phase(out: &AdmissionOutcome) -> &'static str {
    match out {
        AdmissionOutcome::AdmittedNoEvict => "admit",
        AdmissionOutcome::AdmittedEvicting(v) if v.iter().any(|t| t.sender.is_benign()) => {
            "evict-normal"
        }
        AdmissionOutcome::AdmittedEvicting(_) => "evict-adversarial",
        AdmissionOutcome::Declined(_) => "decline",
    }
}

/// Run-length-collapsed sequence of event classes.
pub fn phase_profile(outcomes: &[AdmissionOutcome]) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for o in outcomes {
        let p = phase(o);
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

/// Extends a short exploit to `target` by re-instantiating its pattern at the
/// target's scale (or, for unlabeled exploits, repeating its schedule with
/// fresh senders) and checking that the oracle still fires.
pub fn extend(
    short: &Exploit,
    target: &MempoolPolicy,
    cfg: &OracleConfig,
) -> Result<Exploit, ExploitError> {
    if *target == short.mut_config {
        return Ok(short.clone());
    }
    // a pattern the target cannot express falls back to plain repetition
    let txs = match short.pattern.map(|p| generate_xt(p, target, &XtParams::default())) {
        Some(Ok(txs)) => txs,
        Some(Err(ExploitError::Incompatible(..))) | None => repeat_schedule(short, target),
        Some(Err(e)) => return Err(e),
    };
    let (ext, tl) = Exploit::from_txs(target, short.kind, short.pattern, txs, cfg)?;
    if ext.verdict.triggered {
        return Ok(ext);
    }
    let short_tl = run_timeline(&short.mut_config, short.kind, &short.concrete_txs, cfg)?;
    let want = phase_profile(&short_tl.outcomes);
    let got = phase_profile(&tl.outcomes);
    let first_decline = tl
        .outcomes
        .iter()
        .position(|o| !o.admitted())
        .map(|i| format!("tx #{i} {} declined: {:?}", ext.concrete_txs[i], tl.outcomes[i]));
    let divergence = if want != got {
        format!("event profile {want:?} became {got:?}")
    } else if let Some(d) = first_decline {
        d
    } else if !ext.verdict.damage_ok {
        "normal transactions survive in the end state".to_string()
    } else {
        format!("asym {} above bound", crate::oracle::decimal(&ext.verdict.asym, 6))
    };
    let events = tl
        .outcomes
        .iter()
        .zip(&ext.concrete_txs)
        .enumerate()
        .filter(|(_, (o, _))| !o.admitted())
        .take(32)
        .map(|(i, (o, t))| format!("#{i} {t} -> {o:?}"))
        .collect();
    Err(ExploitError::ExtensionFailed {
        trace: DivergenceTrace { pattern: short.pattern, target: target.name.clone(), divergence, events },
    })
}

/// Repeats a schedule with fresh senders until it covers the target pool.
fn repeat_schedule(short: &Exploit, target: &MempoolPolicy) -> Vec<Transaction> {
    let reps = target.capacity.div_ceil(short.mut_config.capacity.max(1));
    let scale_price = |p: u64| {
        if p > short.mut_config.m() + 3 {
            target.m() + 4
        } else {
            p
        }
    };
    let scale_value = |v: u64| {
        if v >= short.mut_config.m() - 1 {
            target.m() - (short.mut_config.m() - v).min(target.m())
        } else {
            v
        }
    };
    let mut out = Vec::new();
    let mut next = 0u32;
    for _ in 0..reps {
        let mut map: BTreeMap<Address, Address> = BTreeMap::new();
        for t in &short.concrete_txs {
            let a = *map.entry(t.sender).or_insert_with(|| {
                next += 1;
                Address::adversarial(next)
            });
            let nonce = if t.nonce > short.mut_config.m() { target.m() + 1 } else { t.nonce };
            out.push(Transaction::new(a, nonce, scale_value(t.value), scale_price(t.gas_price)));
        }
    }
    out
}

/// Benign traffic used by [`replay`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadSpec {
    /// Normal transactions arriving per block, each from a fresh sender.
    pub benign_per_block: usize,
    pub price: u64,
    /// Block capacity in transactions.
    pub block_txs: usize,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec { benign_per_block: 0, price: NORMAL_PRICE, block_txs: 0 }
    }
}

impl WorkloadSpec {
    /// Zero fields default to the pool capacity.
    pub fn resolved(&self, m: usize) -> WorkloadSpec {
        WorkloadSpec {
            benign_per_block: if self.benign_per_block == 0 { m } else { self.benign_per_block },
            price: self.price,
            block_txs: if self.block_txs == 0 { m } else { self.block_txs },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPoint {
    pub block: usize,
    pub gas_used: u64,
    pub benign_fees: u128,
    pub adversarial_fees: u128,
    pub base_price: u128,
    pub phase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub success_rate: f64,
    /// Adversarial fees included per block, in fee units (price × gas).
    pub cost_per_block: f64,
    pub benign_fees_per_block: f64,
    /// Included adversarial fees over the benign fees the attack removed.
    pub asym: f64,
    pub blocks: usize,
    pub feasible: bool,
    pub series: Vec<BlockPoint>,
}

fn remap(txs: &[Transaction], offset: u32) -> Vec<Transaction> {
    let mut map: BTreeMap<Address, Address> = BTreeMap::new();
    let mut next = offset;
    txs.iter()
        .map(|t| {
            let a = *map.entry(t.sender).or_insert_with(|| {
                next += 1;
                Address::adversarial(next)
            });
            Transaction { sender: a, ..*t }
        })
        .collect()
}

fn distinct_senders(txs: &[Transaction]) -> u32 {
    txs.iter().map(|t| t.sender).collect::<BTreeSet<_>>().len() as u32
}

fn split_fees(block: &[Transaction]) -> (u128, u128) {
    let benign = block.iter().filter(|t| t.sender.is_benign()).map(fee).sum();
    let adv = block.iter().filter(|t| !t.sender.is_benign()).map(fee).sum();
    (benign, adv)
}

fn run_blocks(
    policy: &MempoolPolicy,
    attack: Option<&[Transaction]>,
    w: &WorkloadSpec,
    blocks: usize,
    delay: f64,
) -> Result<Vec<BlockPoint>, ExploitError> {
    let mut pool = new_pool(policy.clone(), WorldState::new(policy.m()))?;
    pool.fill_normal(policy.capacity)?;
    let pre = ((w.benign_per_block as f64) * delay.clamp(0.0, 1.0)).floor() as usize;
    let mut series = Vec::with_capacity(blocks);
    let per_round = attack.map(distinct_senders).unwrap_or(0);
    for b in 0..blocks {
        for _ in 0..pre {
            let tx = pool.next_normal_tx(w.price);
            pool.admit(tx);
        }
        if let Some(txs) = attack {
            for t in remap(txs, per_round * b as u32) {
                pool.admit(t);
            }
        }
        for _ in pre..w.benign_per_block {
            let tx = pool.next_normal_tx(w.price);
            pool.admit(tx);
        }
        let block = pool.build_block(w.block_txs as u64 * GAS);
        let (benign_fees, adversarial_fees) = split_fees(&block);
        series.push(BlockPoint {
            block: b,
            gas_used: block.len() as u64 * GAS,
            benign_fees,
            adversarial_fees,
            base_price: 0,
            phase: if attack.is_some() { "attack" } else { "baseline" }.to_string(),
        });
    }
    Ok(series)
}

/// Replays an exploit against a block-building workload and measures the
/// benign fees it removes. Each block the exploit is re-sent from fresh
/// senders after a `attack_delay` fraction of the block's benign arrivals.
pub fn replay(
    exploit: Option<&Exploit>,
    policy: &MempoolPolicy,
    workload: &WorkloadSpec,
    blocks: usize,
    attack_delay: f64,
) -> Result<ReplayReport, ExploitError> {
    let w = workload.resolved(policy.capacity);
    let base = run_blocks(policy, None, &w, blocks, attack_delay)?;
    let Some(ex) = exploit else {
        let benign: u128 = base.iter().map(|p| p.benign_fees).sum();
        return Ok(ReplayReport {
            success_rate: 0.0,
            cost_per_block: 0.0,
            benign_fees_per_block: benign as f64 / blocks.max(1) as f64,
            asym: 0.0,
            blocks,
            feasible: true,
            series: base,
        });
    };
    let attacked = run_blocks(policy, Some(&ex.concrete_txs), &w, blocks, attack_delay)?;
    let base_benign: u128 = base.iter().map(|p| p.benign_fees).sum();
    let att_benign: u128 = attacked.iter().map(|p| p.benign_fees).sum();
    let adv: u128 = attacked.iter().map(|p| p.adversarial_fees).sum();
    let success_rate = if base_benign == 0 {
        0.0
    } else {
        (1.0 - att_benign as f64 / base_benign as f64).clamp(0.0, 1.0)
    };
    let lost = base_benign.saturating_sub(att_benign);
    Ok(ReplayReport {
        success_rate,
        cost_per_block: adv as f64 / blocks.max(1) as f64,
        benign_fees_per_block: att_benign as f64 / blocks.max(1) as f64,
        asym: if lost == 0 { f64::INFINITY } else { adv as f64 / lost as f64 },
        blocks,
        feasible: true,
        series: attacked,
    })
}

/// One block of the base-price recurrence:
/// `bp · (7/8 + 1/4 · gas_used / limit)`, rounded half up, never below 1.
pub fn base_price_step(bp: u128, gas_used: u64, block_limit: u64) -> u128 {
    let l = block_limit.max(1) as u128;
    let g = (gas_used as u128).min(l);
    let num = bp * (7 * l + 2 * g);
    let den = 8 * l;
    ((2 * num + den) / (2 * den)).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Xt8aReport {
    pub feasible: bool,
    pub reason: Option<String>,
    pub initial_base_price: u128,
    pub lock_start: usize,
    pub lock_blocks: usize,
    pub series: Vec<BlockPoint>,
}

/// Eviction rounds against a validator pool drive the base price down; once
/// it is below `lock_price` the attacker locks a FIFO pool at that price.
pub fn simulate_xt8a(
    policy: &MempoolPolicy,
    validator: &MempoolPolicy,
    workload: &WorkloadSpec,
    initial_base_price: u128,
    eviction_blocks: usize,
    lock_price: u64,
    max_lock_blocks: usize,
) -> Result<Xt8aReport, ExploitError> {
    let w = workload.resolved(policy.capacity);
    let limit = w.block_txs as u64 * GAS;
    let mut bp = initial_base_price;
    let mut series = Vec::new();

    let mut vpool = new_pool(validator.clone(), WorldState::new(validator.m()))?;
    vpool.fill_normal(validator.capacity)?;
    let evict = generate_xt(Pattern::XT1, validator, &XtParams::default())?;
    let per_round = distinct_senders(&evict);
    let benign_price = |bp: u128| bp.min(u64::MAX as u128) as u64;
    for b in 0..eviction_blocks {
        for t in remap(&evict, per_round * b as u32) {
            let t = Transaction { gas_price: t.gas_price.max(benign_price(bp) * 2), ..t };
            vpool.admit(t);
        }
        for _ in 0..w.benign_per_block {
            let tx = vpool.next_normal_tx(benign_price(bp));
            vpool.admit(tx);
        }
        vpool.price_floor = benign_price(bp);
        let block = vpool.build_block(limit);
        let (benign_fees, adversarial_fees) = split_fees(&block);
        let gas_used = block.len() as u64 * GAS;
        series.push(BlockPoint { block: b, gas_used, benign_fees, adversarial_fees, base_price: bp, phase: "evict".into() });
        bp = base_price_step(bp, gas_used, limit);
    }

    let lock_start = eviction_blocks;
    if (lock_price as u128) < bp {
        return Ok(Xt8aReport {
            feasible: false,
            reason: Some(format!("lock price {lock_price} below base price {bp}")),
            initial_base_price,
            lock_start,
            lock_blocks: 0,
            series,
        });
    }
    let mut pool = new_pool(policy.clone(), WorldState::new(policy.m()))?;
    let lock = generate_xt(Pattern::XT8, policy, &XtParams { low_price: Some(lock_price), ..Default::default() })?;
    let per_round = distinct_senders(&lock);
    let mut lock_blocks = 0;
    for i in 0..max_lock_blocks {
        let b = lock_start + i;
        let locking = (lock_price as u128) >= bp;
        pool.price_floor = benign_price(bp);
        if locking {
            for t in remap(&lock, per_round * i as u32) {
                pool.admit(t);
            }
            lock_blocks += 1;
        }
        for _ in 0..w.benign_per_block {
            let price = benign_price(bp).saturating_mul(2).max(w.price);
            let tx = pool.next_normal_tx(price);
            pool.admit(tx);
        }
        let block = pool.build_block(limit);
        let (benign_fees, adversarial_fees) = split_fees(&block);
        let gas_used = block.len() as u64 * GAS;
        series.push(BlockPoint {
            block: b,
            gas_used,
            benign_fees,
            adversarial_fees,
            base_price: bp,
            phase: if locking { "lock" } else { "after" }.into(),
        });
        bp = base_price_step(bp, gas_used, limit);
        if !locking {
            break;
        }
    }
    Ok(Xt8aReport { feasible: true, reason: None, initial_base_price, lock_start, lock_blocks, series })
}

/// Policy used for the vulnerability matrix at `m = 16`.
pub fn matrix_policy(base: &str) -> Result<MempoolPolicy, MempoolError> {
    let spec = match base {
        "geth-legacy" => "geth-legacy-reduced(16,16,8,13)",
        "geth-1.11" => "geth-1.11-reduced(16,3,8,13)",
        "besu-legacy" => "besu-legacy-reduced(16,16,8,0)",
        "besu-22.7" => "besu-22.7-reduced(16,16,8,0)",
        "nethermind-legacy" => "nethermind-legacy-reduced(16,16,16,16)",
        "nethermind-1.18" => "nethermind-1.18-reduced(16,16,16,16)",
        "reth-fifo" => "reth-fifo-reduced(16,16,16,16)",
        "openethereum" => "openethereum-reduced(16,16,8,0)",
        other => other,
    };
    crate::mempool::policy_preset(spec)
}

/// Expected presence (`Some(true)`), patched absence (`Some(false)`) or no
/// claim (`None`) for each preset and pattern.
pub fn vulnerability_matrix(base: &str) -> [Option<bool>; 9] {
    let (t, f, n) = (Some(true), Some(false), None);
    match base {
        "geth-1.11" => [f, f, n, f, t, t, n, n, n],
        "geth-legacy" => [t, t, t, t, t, t, n, n, n],
        "besu-22.7" => [f, t, n, t, n, n, n, n, n],
        "besu-legacy" => [t, t, n, t, n, n, n, n, n],
        "nethermind-1.18" => [f, n, n, t, n, n, f, n, n],
        "nethermind-legacy" => [t, n, n, t, n, n, t, n, n],
        "reth-fifo" => [n, n, n, n, n, n, n, t, n],
        "openethereum" => [n, n, n, t, n, n, n, n, t],
        _ => [n; 9],
    }
}

/// Generates `pattern` for `policy` and runs it through the oracle.
pub fn evaluate_xt(
    pattern: Pattern,
    policy: &MempoolPolicy,
    params: &XtParams,
    cfg: &OracleConfig,
) -> Result<(Exploit, Timeline), ExploitError> {
    let txs = generate_xt(pattern, policy, params)?;
    Exploit::from_txs(policy, pattern.kind(), Some(pattern), txs, cfg)
}
