//! Command-line front end: run configuration, subcommands and output files.
//!
//! Settings resolve as flags, then `MPFUZZ_*` environment variables, then
//! the `--config` TOML file, then the preset.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{compare, write_csv, Baseline, BaselineError};
use crate::exploitkit::{
    evaluate_xt, extend, matrix_policy, replay, simulate_xt8a, vulnerability_matrix, Exploit,
    ExploitError, Pattern, WorkloadSpec, XtParams,
};
use crate::fuzzer::{FuzzConfig, FuzzError, Fuzzer};
use crate::mempool::{
    policy_preset, preset_names, EvictionRule, MempoolError, MempoolPolicy, SenderLimitAction,
    TurningRule,
};
use crate::oracle::{classify_tp_fp, decimal, OracleConfig, OracleError, OracleKind};
use crate::symbolic::Alphabet;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Mempool(#[from] MempoolError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Exploit(#[from] ExploitError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

/// Optional replacements for any preset field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyOverrides {
    pub capacity: Option<usize>,
    pub future_quota: Option<usize>,
    pub sender_limit: Option<usize>,
    pub sender_limit_threshold: Option<usize>,
    pub eviction_rule: Option<EvictionRule>,
    pub turning_rule: Option<TurningRule>,
    pub replacement_allowed: Option<bool>,
    pub replacement_overdraft_guard: Option<bool>,
    pub reversal_guard: Option<bool>,
    pub futures_evict_pending: Option<bool>,
    pub cumulative_balance_check: Option<bool>,
    pub sender_limit_action: Option<SenderLimitAction>,
}

impl PolicyOverrides {
    pub fn is_empty(&self) -> bool {
        *self == PolicyOverrides::default()
    }

    pub fn apply(&self, mut p: MempoolPolicy) -> Result<MempoolPolicy, MempoolError> {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(
            capacity,
            future_quota,
            sender_limit,
            sender_limit_threshold,
            eviction_rule,
            turning_rule,
            replacement_allowed,
            replacement_overdraft_guard,
            reversal_guard,
            futures_evict_pending,
            cumulative_balance_check,
            sender_limit_action
        );
        if !self.is_empty() {
            p.name = format!("{}+custom", p.name);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_mutations: Option<u64>,
    pub seconds: Option<f64>,
}

/// Everything a run depends on; written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub rng_seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub cache: bool,
    pub alphabet: Alphabet,
    pub families: Vec<OracleKind>,
    pub stop_after_first: bool,
    pub explore_exploits: bool,
    pub blocks: usize,
    pub attack_delay: f64,
    pub policy: PolicyOverrides,
    pub oracle: OracleConfig,
    pub budget: Budget,
    pub workload: WorkloadSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: "geth-1.11-reduced(6)".into(),
            rng_seed: 0,
            out: PathBuf::from("out"),
            workers: 1,
            cache: true,
            alphabet: Alphabet::all(),
            families: vec![OracleKind::Eviction],
            stop_after_first: false,
            explore_exploits: true,
            blocks: 20,
            attack_delay: 0.0,
            policy: PolicyOverrides::default(),
            oracle: OracleConfig::default(),
            budget: Budget::default(),
            workload: WorkloadSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<RunConfig, CliError> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn policy(&self) -> Result<MempoolPolicy, CliError> {
        Ok(self.policy.apply(policy_preset(&self.preset)?)?)
    }

    pub fn fuzz_config(&self) -> FuzzConfig {
        FuzzConfig {
            oracle: self.oracle.clone(),
            alphabet: self.alphabet.clone(),
            families: self.families.clone(),
            max_mutations: self.budget.max_mutations,
            max_seconds: self.budget.seconds,
            rng_seed: self.rng_seed,
            cache: self.cache,
            stop_after_first: self.stop_after_first,
            explore_exploits: self.explore_exploits,
            workers: self.workers,
            ..FuzzConfig::default()
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, env = "MPFUZZ_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    /// Preset, e.g. `geth-1.11` or `geth-1.11-reduced(3,1,2,2)`.
    #[arg(long, env = "MPFUZZ_PRESET", global = true)]
    pub preset: Option<String>,
    #[arg(long, env = "MPFUZZ_EPSILON", global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, env = "MPFUZZ_LAMBDA", global = true)]
    pub lambda: Option<f64>,
    #[arg(long, env = "MPFUZZ_SEED", global = true)]
    pub seed: Option<u64>,
    #[arg(long, env = "MPFUZZ_BUDGET_MUTATIONS", global = true)]
    pub budget_mutations: Option<u64>,
    #[arg(long, env = "MPFUZZ_BUDGET_SECONDS", global = true)]
    pub budget_seconds: Option<f64>,
    #[arg(long, env = "MPFUZZ_OUT", global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "MPFUZZ_WORKERS", global = true)]
    pub workers: Option<usize>,
    /// Re-execute every seed input instead of reusing cached pools.
    #[arg(long, env = "MPFUZZ_NO_CACHE", global = true)]
    pub no_cache: bool,
}

impl Common {
    /// Layers the flags over the config file (or defaults).
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml(&read(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.preset {
            cfg.preset = v.clone();
        }
        if let Some(v) = self.epsilon {
            cfg.oracle.epsilon = v;
        }
        if let Some(v) = self.lambda {
            cfg.oracle.lambda = v;
        }
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = self.budget_mutations {
            cfg.budget.max_mutations = Some(v);
        }
        if let Some(v) = self.budget_seconds {
            cfg.budget.seconds = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if self.no_cache {
            cfg.cache = false;
        }
        cfg.oracle.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "mpfuzz", version, about = "Symbolized stateful fuzzing of mempool admission policies")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuzz a preset and write exploits, a progress log and a summary.
    Fuzz,
    /// Extend a short exploit file to a target preset.
    Extend {
        exploit: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Replay an exploit file (or no attack) under a block-building workload.
    Replay {
        exploit: Option<PathBuf>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        delay: Option<f64>,
    },
    /// Evaluate named patterns: the vulnerability matrix, one pattern, or
    /// the base-price-then-lock scenario.
    Eval {
        #[arg(long)]
        pattern: Option<Pattern>,
        /// Run the eviction-then-lock scenario on the preset.
        #[arg(long)]
        xt8a: bool,
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Mutations-to-first-exploit grid over fuzzers, presets and seeds.
    Compare {
        /// Comma-separated; commas inside `-reduced(...)` are kept.
        #[arg(long)]
        presets: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "mpfuzz,B4,B3,B2,B1")]
        baselines: Vec<Baseline>,
        #[arg(long, default_value_t = 5)]
        repeats: u64,
    },
    /// List presets, their parameters and expected pattern matrix.
    Presets {
        filter: Option<String>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Debug, Serialize)]
struct FuzzSummary<'a> {
    preset: &'a str,
    exploits: usize,
    mutations: u64,
    states_covered: usize,
    first_exploit_at: Option<u64>,
    termination: crate::fuzzer::Termination,
    patterns: std::collections::BTreeMap<String, usize>,
}

pub fn cmd_fuzz(cfg: &RunConfig) -> Result<(), CliError> {
    let policy = cfg.policy()?;
    write(&cfg.out.join("run-config.toml"), &cfg.to_toml())?;
    let log = create(&cfg.out.join("progress.jsonl"))?;
    let mut fuzzer = Fuzzer::new(policy.clone(), cfg.fuzz_config())?.with_log(Box::new(log));
    let report = fuzzer.run()?;
    drop(fuzzer);
    let dir = cfg.out.join("exploits");
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    }
    for (i, e) in report.exploits.iter().enumerate() {
        write(&dir.join(format!("exploit-{i:04}.json")), &(e.to_json() + "\n"))?;
    }
    let summary = FuzzSummary {
        preset: &policy.name,
        exploits: report.exploits.len(),
        mutations: report.mutations,
        states_covered: report.states_covered,
        first_exploit_at: report.first_exploit_at,
        termination: report.termination,
        patterns: crate::fuzzer::pattern_counts(&report),
    };
    write(&cfg.out.join("summary.json"), &json(&summary))?;
    println!(
        "{}: {} exploits, {} mutations, {} states covered",
        policy.name, summary.exploits, summary.mutations, summary.states_covered
    );
    for e in report.exploits.iter().take(10) {
        println!(
            "  {} -> {}  asym={}  {}",
            e.symbol_sequence,
            e.end_state,
            decimal(&e.verdict.asym, 4),
            e.pattern.map(|p| p.to_string()).unwrap_or_default()
        );
    }
    Ok(())
}

pub fn cmd_extend(cfg: &RunConfig, exploit: &Path, target: &str) -> Result<(), CliError> {
    let short = Exploit::from_json(&read(exploit)?)?;
    let target = cfg.policy.apply(policy_preset(target)?)?;
    match extend(&short, &target, &cfg.oracle) {
        Ok(ext) => {
            let tp = classify_tp_fp(&short.verdict, &ext.verdict, &cfg.oracle);
            write(&cfg.out.join("extended.json"), &(ext.to_json() + "\n"))?;
            println!(
                "extended to {}: {} txs, triggered={}, asym={}, {:?}",
                target.name,
                ext.concrete_txs.len(),
                ext.verdict.triggered,
                decimal(&ext.verdict.asym, 6),
                tp
            );
        }
        Err(ExploitError::ExtensionFailed { trace }) => {
            write(&cfg.out.join("divergence.json"), &json(&trace))?;
            println!("extension to {} failed: {}", target.name, trace.divergence);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn write_series(out: &Path, series: &[crate::exploitkit::BlockPoint]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(&out.join("series.csv"))?);
    for p in series {
        w.serialize(p).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(out.join("series.csv"), e))
}

pub fn cmd_replay(
    cfg: &RunConfig,
    exploit: Option<&Path>,
    blocks: Option<usize>,
    delay: Option<f64>,
) -> Result<(), CliError> {
    let ex = exploit.map(|p| read(p).and_then(|s| Ok(Exploit::from_json(&s)?))).transpose()?;
    let policy = match &ex {
        Some(e) if cfg.preset == RunConfig::default().preset => e.mut_config.clone(),
        _ => cfg.policy()?,
    };
    let blocks = blocks.unwrap_or(cfg.blocks);
    let r = replay(ex.as_ref(), &policy, &cfg.workload, blocks, delay.unwrap_or(cfg.attack_delay))?;
    write(&cfg.out.join("replay.json"), &json(&r))?;
    write_series(&cfg.out, &r.series)?;
    println!(
        "{}: success_rate={:.4} cost_per_block={:.1} benign_fees_per_block={:.1} blocks={}",
        policy.name, r.success_rate, r.cost_per_block, r.benign_fees_per_block, r.blocks
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct MatrixRow {
    preset: String,
    pattern: String,
    expected: String,
    triggered: bool,
    asym: String,
    end_state: String,
}

pub fn cmd_eval(
    cfg: &RunConfig,
    pattern: Option<Pattern>,
    xt8a: bool,
    blocks: Option<usize>,
) -> Result<(), CliError> {
    if xt8a {
        let policy = cfg.policy()?;
        let validator = policy_preset("geth-legacy-reduced(16,16,8,13)")?;
        let r = simulate_xt8a(&policy, &validator, &cfg.workload, 1_000_000_000_000_000, 35, 50_000_000_000_000, blocks.unwrap_or(cfg.blocks))?;
        write(&cfg.out.join("xt8a.json"), &json(&r))?;
        write_series(&cfg.out, &r.series)?;
        println!("feasible={} lock_start={} lock_blocks={}", r.feasible, r.lock_start, r.lock_blocks);
        return Ok(());
    }
    if let Some(p) = pattern {
        let policy = cfg.policy()?;
        let (ex, _) = evaluate_xt(p, &policy, &XtParams::default(), &cfg.oracle)?;
        write(&cfg.out.join(format!("{p}.json")), &(ex.to_json() + "\n"))?;
        let r = replay(Some(&ex), &policy, &cfg.workload, blocks.unwrap_or(cfg.blocks), cfg.attack_delay)?;
        write(&cfg.out.join("replay.json"), &json(&r))?;
        println!(
            "{p} on {}: triggered={} asym={} end={} success_rate={:.4}",
            policy.name,
            ex.verdict.triggered,
            decimal(&ex.verdict.asym, 4),
            ex.end_state,
            r.success_rate
        );
        return Ok(());
    }
    let mut rows = Vec::new();
    for base in preset_names() {
        let policy = matrix_policy(base)?;
        let expected = vulnerability_matrix(base);
        for (i, p) in Pattern::ALL.iter().enumerate() {
            let (triggered, asym, end_state) =
                match evaluate_xt(*p, &policy, &XtParams::default(), &cfg.oracle) {
                    Ok((ex, _)) => (ex.verdict.triggered, decimal(&ex.verdict.asym, 4), ex.end_state),
                    Err(ExploitError::Incompatible(_, why)) => (false, String::new(), format!("incompatible: {why}")),
                    Err(e) => return Err(e.into()),
                };
            rows.push(MatrixRow {
                preset: base.to_string(),
                pattern: p.to_string(),
                expected: match expected[i] {
                    Some(true) => "present",
                    Some(false) => "absent",
                    None => "",
                }
                .into(),
                triggered,
                asym,
                end_state,
            });
        }
    }
    let mut w = csv::Writer::from_writer(create(&cfg.out.join("matrix.csv"))?);
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
        println!("{:18} {} {:8} triggered={:5} asym={}", r.preset, r.pattern, r.expected, r.triggered, r.asym);
    }
    w.flush().map_err(|e| CliError::Io(cfg.out.join("matrix.csv"), e))?;
    Ok(())
}

/// Splits a preset list on the commas outside parentheses.
pub fn split_presets(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let (mut depth, mut cur) = (0usize, String::new());
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

pub fn cmd_compare(
    cfg: &RunConfig,
    presets: &[String],
    baselines: &[Baseline],
    repeats: u64,
) -> Result<(), CliError> {
    let names: Vec<String> = presets.iter().flat_map(|p| split_presets(p)).collect();
    let names = if names.is_empty() { vec![cfg.preset.clone()] } else { names };
    let policies = names.iter().map(|n| policy_preset(n)).collect::<Result<Vec<_>, _>>()?;
    let seeds: Vec<u64> = (0..repeats).map(|i| cfg.rng_seed + i).collect();
    let cap = cfg.budget.max_mutations.unwrap_or(2_000_000);
    let rows = compare(&policies, baselines, &seeds, &cfg.oracle, cap)?;
    write_csv(&rows, create(&cfg.out.join("compare.csv"))?)?;
    for r in &rows {
        println!("{:8} {:28} seed={} mutations={} found={}", r.baseline, r.preset, r.rng_seed, r.mutations_to_first, r.found);
    }
    Ok(())
}

pub fn cmd_presets(filter: Option<&str>) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    for base in preset_names().iter().filter(|n| filter.map_or(true, |f| n.contains(f))) {
        let p = policy_preset(base)?;
        let row: String = vulnerability_matrix(base)
            .iter()
            .map(|c| match c {
                Some(true) => 'x',
                Some(false) => 'v',
                None => '.',
            })
            .collect();
        let _ = writeln!(
            out,
            "{:18} m={} py1={} py2={} py3={} evict={:?} turn={:?} xt1-9={}",
            base, p.capacity, p.future_quota, p.sender_limit, p.sender_limit_threshold, p.eviction_rule, p.turning_rule, row
        );
    }
    Ok(())
}

pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    if let Command::Presets { filter } = &cli.command {
        return cmd_presets(filter.as_deref());
    }
    let cfg = cli.common.resolve()?;
    match &cli.command {
        Command::Fuzz => cmd_fuzz(&cfg),
        Command::Extend { exploit, target } => cmd_extend(&cfg, exploit, target),
        Command::Replay { exploit, blocks, delay } => cmd_replay(&cfg, exploit.as_deref(), *blocks, *delay),
        Command::Eval { pattern, xt8a, blocks } => cmd_eval(&cfg, *pattern, *xt8a, *blocks),
        Command::Compare { presets, baselines, repeats } => cmd_compare(&cfg, presets, baselines, *repeats),
        Command::Presets { .. } => unreachable!("handled above"),
    }
}

/// Process entry point used by the binary.
pub fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) if msg.starts_with("Usage") || msg.contains("--help") => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_lists_keep_reduced_args() {
        assert_eq!(
            split_presets("geth-1.11-reduced(3,1,2,2), geth-legacy"),
            ["geth-1.11-reduced(3,1,2,2)", "geth-legacy"]
        );
        assert!(split_presets("").is_empty());
    }

    #[test]
    fn config_roundtrip() {
        let cfg = RunConfig { preset: "geth-1.11-reduced(3,1,2,2)".into(), ..Default::default() };
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join("mpfuzz-cli-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        fs::write(&path, "preset = \"reth-fifo-reduced(6)\"\n[oracle]\nepsilon = 0.2\n").unwrap();
        let c = Common { config: Some(path), epsilon: Some(0.1), ..Default::default() };
        let cfg = c.resolve().unwrap();
        assert_eq!(cfg.preset, "reth-fifo-reduced(6)");
        assert_eq!(cfg.oracle.epsilon, 0.1);
    }

    #[test]
    fn bad_config_is_an_error() {
        assert!(RunConfig::from_toml("nonsense = 1").is_err());
        assert!(run(["mpfuzz", "fuzz", "--epsilon", "2.0"]).is_err());
    }

    #[test]
    fn overrides_apply() {
        let o = PolicyOverrides { reversal_guard: Some(true), ..Default::default() };
        let p = o.apply(policy_preset("nethermind-legacy").unwrap()).unwrap();
        assert!(p.reversal_guard);
    }
}
