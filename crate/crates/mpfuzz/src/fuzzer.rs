//! The symbolized stateful fuzzing loop.
//!
//! Seeds pair a symbolized input with the symbolized pool state it reaches.
//! Each round the seed with the highest energy (`b / opcost`) is selected
//! and every untried feasible symbol is appended to it; new states that look
//! promising join the corpus, and states that satisfy an oracle are emitted
//! as exploits.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::Instant;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exploitkit::{probe, Exploit};
use crate::mempool::{AdmissionOutcome, MempoolPolicy};
use crate::oracle::{check_eviction, check_locking, OracleConfig, OracleError, OracleKind, OracleVerdict};
use crate::symbolic::{
    cost, opcost, Alphabet, Init, Symbol, SymbolError, SymbolizedInput, SymbolizedState,
    SymbolizedTx, SymExec,
};

#[derive(Debug, Error)]
pub enum FuzzError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cached state of `{0}` diverged from re-execution")]
    Nondeterminism(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("log: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzConfig {
    pub oracle: OracleConfig,
    pub alphabet: Alphabet,
    /// Oracle families explored; each starts from its own initial seed.
    pub families: Vec<OracleKind>,
    pub max_mutations: Option<u64>,
    pub max_seconds: Option<f64>,
    pub rng_seed: u64,
    /// Reuse the concrete pool of a seed instead of re-executing its input.
    pub cache: bool,
    /// Re-execute and compare every this many cache hits (0 disables).
    pub audit_every: u64,
    pub stop_after_first: bool,
    /// Keep exploring from states that already satisfy an oracle.
    pub explore_exploits: bool,
    /// Without it, any new state is kept (the promising-ness ablation).
    pub promising: bool,
    pub workers: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            oracle: OracleConfig::default(),
            alphabet: Alphabet::all(),
            families: vec![OracleKind::Eviction],
            max_mutations: None,
            max_seconds: None,
            rng_seed: 0,
            cache: true,
            audit_every: 64,
            stop_after_first: false,
            explore_exploits: true,
            promising: true,
            workers: 1,
        }
    }
}

/// Seed priority: `Infinite` for untried seeds whose opcost is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Energy {
    Zero,
    Finite(Ratio<u64>),
    Infinite,
}

#[derive(Debug, Clone)]
pub struct Seed {
    pub family: OracleKind,
    pub input: SymbolizedInput,
    pub sym_state: SymbolizedState,
    pub cached: Option<SymExec>,
    pub tried: BTreeSet<SymbolizedTx>,
    pub candidates: Vec<SymbolizedTx>,
    pub selections: u64,
    /// Benign probes the state declines out of `m`.
    pub probe_declines: usize,
}

impl Seed {
    pub fn key(&self) -> String {
        self.sym_state.key()
    }

    pub fn untried(&self) -> Vec<SymbolizedTx> {
        self.candidates.iter().filter(|c| !self.tried.contains(c)).copied().collect()
    }
}

/// `b / opcost` with `b = 1` while untried candidates remain.
pub fn energy(seed: &Seed) -> Energy {
    if seed.tried.len() >= seed.candidates.len() {
        return Energy::Zero;
    }
    match opcost(&seed.sym_state) {
        0 => Energy::Infinite,
        c => Energy::Finite(Ratio::new(1, c)),
    }
}

/// Fewer normal txs, more declined probes, or lower (op)cost.
pub fn st_promising(
    new: &SymbolizedState,
    old: &SymbolizedState,
    new_declines: usize,
    old_declines: usize,
) -> bool {
    new.count(Symbol::N) < old.count(Symbol::N)
        || new_declines > old_declines
        || cost(new) < cost(old)
        || opcost(new) < opcost(old)
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub seeds: Vec<Seed>,
    pub covered: BTreeSet<(OracleKind, String)>,
    pub rng_seed: u64,
}

impl Corpus {
    /// Max energy, ties to the earliest insertion; `None` when all are zero.
    pub fn select_next(&self) -> Option<usize> {
        let mut best: Option<(usize, Energy)> = None;
        for (i, s) in self.seeds.iter().enumerate() {
            let e = energy(s);
            if e == Energy::Zero {
                continue;
            }
            if best.map_or(true, |(_, b)| e > b) {
                best = Some((i, e));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn feedback(&self, family: OracleKind, new: &SymbolizedState, promising: bool) -> bool {
        !self.covered.contains(&(family, new.key())) && promising
    }
}

/// One executed mutation, before it is merged into the corpus.
#[derive(Debug, Clone)]
pub struct Mutated {
    pub candidate: SymbolizedTx,
    pub exec: Option<SymExec>,
    pub outcome: Option<AdmissionOutcome>,
    pub sym_state: Option<SymbolizedState>,
    pub probe_declines: usize,
    pub verdict: Option<OracleVerdict>,
}

fn init_of(family: OracleKind) -> Init {
    match family {
        OracleKind::Eviction => Init::Normal,
        OracleKind::Locking => Init::Empty,
    }
}

fn probe_count(ex: &SymExec, cfg: &OracleConfig) -> usize {
    cfg.probes.unwrap_or(ex.state.policy.capacity)
}

/// Runs the oracle of `family` on a context.
pub fn check(ex: &SymExec, family: OracleKind, cfg: &OracleConfig) -> (usize, OracleVerdict) {
    let (probed, dcn) = probe(&ex.state, probe_count(ex, cfg));
    let verdict = match family {
        OracleKind::Eviction => check_eviction(&ex.initial, &ex.state, cfg),
        OracleKind::Locking => check_locking(&probed, &dcn, cfg),
    };
    (dcn.len(), verdict)
}

/// Appends `candidate` to a copy of `base` and admits it.
pub fn mutate_exec(
    base: &SymExec,
    family: OracleKind,
    candidate: SymbolizedTx,
    cfg: &OracleConfig,
) -> Mutated {
    let mut ex = base.clone();
    let outcome = match ex.apply(candidate) {
        Ok(o) => o,
        Err(_) => {
            return Mutated { candidate, exec: None, outcome: None, sym_state: None, probe_declines: 0, verdict: None }
        }
    };
    let st = ex.symbolized();
    let (declines, verdict) = check(&ex, family, cfg);
    let verdict = outcome.admitted().then_some(verdict);
    Mutated {
        candidate,
        exec: Some(ex),
        outcome: Some(outcome),
        sym_state: Some(st),
        probe_declines: declines,
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub mutation: u64,
    pub seed: String,
    pub candidate: String,
    pub outcome: String,
    pub state: String,
    pub feedback: bool,
    pub exploit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Exhausted,
    MutationBudget,
    TimeBudget,
    FirstExploit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub exploits: Vec<Exploit>,
    pub mutations: u64,
    pub states_covered: usize,
    pub first_exploit_at: Option<u64>,
    /// Keys of corpus insertions in order, after the initial seeds.
    pub corpus_trace: Vec<String>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSnapshot {
    pub family: OracleKind,
    pub input: String,
    pub tried: Vec<String>,
    pub selections: u64,
}

/// Serializable corpus state; restoring re-executes every seed input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSnapshot {
    pub policy: MempoolPolicy,
    pub seeds: Vec<SeedSnapshot>,
    pub covered: Vec<(OracleKind, String)>,
    pub mutations: u64,
    pub corpus_trace: Vec<String>,
    pub exploits: Vec<Exploit>,
}

pub struct Fuzzer {
    pub policy: MempoolPolicy,
    pub cfg: FuzzConfig,
    pub corpus: Corpus,
    pub mutations: u64,
    exploits: Vec<Exploit>,
    emitted: BTreeSet<(OracleKind, String)>,
    trace: Vec<String>,
    first_exploit_at: Option<u64>,
    cache_hits: u64,
    log: Option<Box<dyn Write>>,
}

impl Fuzzer {
    pub fn new(policy: MempoolPolicy, cfg: FuzzConfig) -> Result<Fuzzer, FuzzError> {
        cfg.oracle.validate()?;
        let mut f = Fuzzer {
            policy,
            corpus: Corpus { rng_seed: cfg.rng_seed, ..Corpus::default() },
            cfg,
            mutations: 0,
            exploits: Vec::new(),
            emitted: BTreeSet::new(),
            trace: Vec::new(),
            first_exploit_at: None,
            cache_hits: 0,
            log: None,
        };
        for family in f.cfg.families.clone() {
            let ex = SymExec::new(f.policy.clone(), init_of(family))?;
            let (declines, _) = check(&ex, family, &f.cfg.oracle);
            f.insert(family, ex, declines, false);
        }
        Ok(f)
    }

    /// Streams one JSON line per mutation to `w`.
    pub fn with_log(mut self, w: Box<dyn Write>) -> Self {
        self.log = Some(w);
        self
    }

    fn insert(&mut self, family: OracleKind, ex: SymExec, probe_declines: usize, traced: bool) {
        let st = ex.symbolized();
        let key = st.key();
        if traced {
            self.trace.push(key.clone());
        }
        self.corpus.covered.insert((family, key));
        let candidates = ex.enumerate_mutations(&self.cfg.alphabet);
        let input = ex.input();
        self.corpus.seeds.push(Seed {
            family,
            input,
            sym_state: st,
            cached: self.cfg.cache.then_some(ex),
            tried: BTreeSet::new(),
            candidates,
            selections: 0,
            probe_declines,
        });
    }

    /// Concrete context of a seed, from cache or by re-execution.
    fn context(&mut self, idx: usize) -> Result<SymExec, FuzzError> {
        let seed = &self.corpus.seeds[idx];
        match &seed.cached {
            Some(ex) => {
                self.cache_hits += 1;
                let ex = ex.clone();
                if self.cfg.audit_every > 0 && self.cache_hits % self.cfg.audit_every == 0 {
                    let fresh = SymExec::replay(self.policy.clone(), init_of(seed.family), &seed.input)?;
                    if fresh.state.to_json() != ex.state.to_json() {
                        return Err(FuzzError::Nondeterminism(seed.input.to_string()));
                    }
                }
                Ok(ex)
            }
            None => Ok(SymExec::replay(self.policy.clone(), init_of(seed.family), &seed.input)?),
        }
    }

    fn budget_left(&self, start: &Instant) -> Option<Termination> {
        if let Some(max) = self.cfg.max_mutations {
            if self.mutations >= max {
                return Some(Termination::MutationBudget);
            }
        }
        if let Some(secs) = self.cfg.max_seconds {
            if start.elapsed().as_secs_f64() >= secs {
                return Some(Termination::TimeBudget);
            }
        }
        None
    }

    fn execute_all(&self, base: &SymExec, family: OracleKind, cands: &[SymbolizedTx]) -> Vec<Mutated> {
        let cfg = &self.cfg.oracle;
        let workers = self.cfg.workers.max(1).min(cands.len().max(1));
        if workers == 1 {
            return cands.iter().map(|c| mutate_exec(base, family, *c, cfg)).collect();
        }
        let chunk = cands.len().div_ceil(workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = cands
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|c| mutate_exec(base, family, *c, cfg)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        })
    }

    /// Runs until the corpus is exhausted, a budget runs out, or (with
    /// `stop_after_first`) the first exploit is found.
    pub fn run(&mut self) -> Result<FuzzReport, FuzzError> {
        let start = Instant::now();
        let termination = loop {
            if let Some(t) = self.budget_left(&start) {
                break t;
            }
            let Some(idx) = self.corpus.select_next() else {
                break Termination::Exhausted;
            };
            if let Some(t) = self.round(idx, &start)? {
                break t;
            }
        };
        Ok(self.report(termination))
    }

    fn round(&mut self, idx: usize, start: &Instant) -> Result<Option<Termination>, FuzzError> {
        self.corpus.seeds[idx].selections += 1;
        let base = self.context(idx)?;
        let family = self.corpus.seeds[idx].family;
        let mut untried = self.corpus.seeds[idx].untried();
        if let Some(max) = self.cfg.max_mutations {
            untried.truncate((max - self.mutations) as usize);
        }
        let results = self.execute_all(&base, family, &untried);
        for m in results {
            self.corpus.seeds[idx].tried.insert(m.candidate);
            let (Some(ex), Some(outcome), Some(st)) = (m.exec, m.outcome, m.sym_state) else {
                continue;
            };
            self.mutations += 1;
            let seed = &self.corpus.seeds[idx];
            let promising = !self.cfg.promising
                || st_promising(&st, &seed.sym_state, m.probe_declines, seed.probe_declines);
            let fb = self.corpus.feedback(family, &st, promising);
            let triggered = m.verdict.as_ref().is_some_and(|v| v.triggered);
            if triggered {
                let verdict = m.verdict.clone().expect("checked above");
                let exploit = Exploit::from_exec(&ex, family, verdict);
                if self.emitted.insert((family, exploit.symbol_sequence.clone())) {
                    self.first_exploit_at.get_or_insert(self.mutations);
                    self.exploits.push(exploit);
                }
            }
            if let Some(w) = self.log.as_mut() {
                let line = LogEntry {
                    mutation: self.mutations,
                    seed: self.corpus.seeds[idx].input.to_string(),
                    candidate: m.candidate.to_string(),
                    outcome: outcome_label(&outcome),
                    state: st.key(),
                    feedback: fb,
                    exploit: triggered,
                };
                writeln!(w, "{}", serde_json::to_string(&line).expect("log line serializes"))?;
            }
            if fb && (!triggered || self.cfg.explore_exploits) {
                self.insert(family, ex, m.probe_declines, true);
            }
            if triggered && self.cfg.stop_after_first {
                return Ok(Some(Termination::FirstExploit));
            }
            if let Some(t) = self.budget_left(start) {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    pub fn report(&self, termination: Termination) -> FuzzReport {
        FuzzReport {
            exploits: self.exploits.clone(),
            mutations: self.mutations,
            states_covered: self.corpus.covered.len(),
            first_exploit_at: self.first_exploit_at,
            corpus_trace: self.trace.clone(),
            termination,
        }
    }

    pub fn snapshot(&self) -> CorpusSnapshot {
        CorpusSnapshot {
            policy: self.policy.clone(),
            seeds: self
                .corpus
                .seeds
                .iter()
                .map(|s| SeedSnapshot {
                    family: s.family,
                    input: s.input.to_string(),
                    tried: s.tried.iter().map(|t| t.to_string()).collect(),
                    selections: s.selections,
                })
                .collect(),
            covered: self.corpus.covered.iter().cloned().collect(),
            mutations: self.mutations,
            corpus_trace: self.trace.clone(),
            exploits: self.exploits.clone(),
        }
    }

    pub fn restore(snap: &CorpusSnapshot, cfg: FuzzConfig) -> Result<Fuzzer, FuzzError> {
        let mut f = Fuzzer::new(snap.policy.clone(), cfg)?;
        f.corpus.seeds.clear();
        f.corpus.covered = snap.covered.iter().cloned().collect();
        for s in &snap.seeds {
            let input: SymbolizedInput =
                s.input.parse().map_err(|e: SymbolError| FuzzError::Snapshot(e.to_string()))?;
            let ex = SymExec::replay(snap.policy.clone(), init_of(s.family), &input)?;
            let (declines, _) = check(&ex, s.family, &f.cfg.oracle);
            f.insert(s.family, ex, declines, false);
            let seed = f.corpus.seeds.last_mut().expect("just inserted");
            seed.selections = s.selections;
            for t in &s.tried {
                seed.tried.insert(t.parse().map_err(|e: SymbolError| FuzzError::Snapshot(e.to_string()))?);
            }
        }
        f.mutations = snap.mutations;
        f.trace = snap.corpus_trace.clone();
        f.exploits = snap.exploits.clone();
        f.emitted = f.exploits.iter().map(|e| (e.kind, e.symbol_sequence.clone())).collect();
        f.first_exploit_at = None;
        Ok(f)
    }
}

fn outcome_label(o: &AdmissionOutcome) -> String {
    match o {
        AdmissionOutcome::AdmittedNoEvict => "admitted".into(),
        AdmissionOutcome::AdmittedEvicting(v) => format!("evicted {}", v.len()),
        AdmissionOutcome::Declined(r) => format!("declined {r}"),
    }
}

/// Runs the fuzzer to completion under `cfg`.
pub fn mpfuzz(policy: &MempoolPolicy, cfg: &FuzzConfig) -> Result<FuzzReport, FuzzError> {
    Fuzzer::new(policy.clone(), cfg.clone())?.run()
}

/// Histogram of exploit labels, handy for summaries.
pub fn pattern_counts(report: &FuzzReport) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for e in &report.exploits {
        let k = e.pattern.map(|p| p.to_string()).unwrap_or_else(|| "unlabeled".into());
        *out.entry(k).or_insert(0) += 1;
    }
    out
}
