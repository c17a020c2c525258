//! The binary end to end: outputs, exit codes and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mpfuzz::exploitkit::{DivergenceTrace, Exploit, Pattern, ReplayReport};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mpfuzz"));
    c.current_dir(env!("CARGO_MANIFEST_DIR"));
    for (k, _) in std::env::vars() {
        if k.starts_with("MPFUZZ_") {
            c.env_remove(k);
        }
    }
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    let o = bin().args(args).arg("--out").arg(out).output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn exploit_files(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = match fs::read_dir(out.join("exploits")) {
        Ok(d) => d.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

#[test]
fn case_study_config_emits_one_xt6_exploit_reproducibly() {
    let (a, b) = (scratch("case-a"), scratch("case-b"));
    run(&["fuzz", "--config", "configs/case-study.toml"], &a);
    run(&["fuzz", "--config", "configs/case-study.toml"], &b);
    let files = exploit_files(&a);
    assert_eq!(files.len(), 1);
    let ex = Exploit::from_json(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(ex.symbol_sequence, "P C1 P0 C1 C1");
    assert_eq!(ex.end_state, "FEE");
    assert_eq!(ex.pattern, Some(Pattern::XT6));
    for f in ["exploits/exploit-0000.json", "summary.json", "progress.jsonl"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn rerun_overwrites_in_place() {
    let out = scratch("rerun");
    run(&["fuzz", "--preset", "geth-legacy-reduced(4)", "--budget-mutations", "200"], &out);
    let first: Vec<Vec<u8>> = exploit_files(&out).iter().map(|f| fs::read(f).unwrap()).collect();
    let summary = fs::read(out.join("summary.json")).unwrap();
    run(&["fuzz", "--preset", "geth-legacy-reduced(4)", "--budget-mutations", "200", "--no-cache"], &out);
    let second: Vec<Vec<u8>> = exploit_files(&out).iter().map(|f| fs::read(f).unwrap()).collect();
    assert!(!first.is_empty());
    assert_eq!(first, second);
    assert_eq!(summary, fs::read(out.join("summary.json")).unwrap());
}

#[test]
fn zero_budget_exits_cleanly() {
    let out = scratch("zero");
    run(&["fuzz", "--config", "configs/case-study.toml", "--budget-mutations", "0"], &out);
    assert!(exploit_files(&out).is_empty());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["exploits"], 0);
}

#[test]
fn errors_exit_nonzero() {
    let out = scratch("errors");
    let o = bin().args(["fuzz", "--out"]).arg(&out).env("MPFUZZ_EPSILON", "3").output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let bad = out.join("bad.toml");
    fs::create_dir_all(&out).unwrap();
    fs::write(&bad, "preset = 7\n").unwrap();
    let o = bin().args(["fuzz", "--config"]).arg(&bad).output().unwrap();
    assert!(!o.status.success());
    let o = bin().args(["fuzz", "--preset", "geth-9"]).arg("--out").arg(&out).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn env_overrides_the_file() {
    let out = scratch("env");
    let o = bin()
        .args(["fuzz", "--config", "configs/case-study.toml"])
        .env("MPFUZZ_BUDGET_MUTATIONS", "0")
        .env("MPFUZZ_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let cfg = fs::read_to_string(out.join("run-config.toml")).unwrap();
    assert!(cfg.contains("max_mutations = 0"), "{cfg}");
}

#[test]
fn presets_filter() {
    let out = scratch("presets");
    let all = String::from_utf8(run(&["presets"], &out).stdout).unwrap();
    assert_eq!(all.lines().count(), 8);
    let g = String::from_utf8(run(&["presets", "geth-1.11"], &out).stdout).unwrap();
    assert_eq!(g.lines().count(), 1);
    assert!(g.contains("m=6144 py1=1024 py2=16 py3=5120"), "{g}");
    let r = String::from_utf8(run(&["presets", "reth"], &out).stdout).unwrap();
    assert!(r.contains("evict=None") && r.contains("xt1-9=.......x."), "{r}");
    assert!(run(&["presets", "nope"], &out).stdout.is_empty());
}

#[test]
fn extend_identity_and_divergence() {
    let out = scratch("extend");
    run(&["eval", "--preset", "geth-legacy-reduced(16,16,8,13)", "--pattern", "XT3", "--blocks", "2"], &out);
    let short = out.join("XT3.json");
    let same = out.join("same");
    run(&["extend", short.to_str().unwrap(), "--target", "geth-legacy-reduced(16,16,8,13)"], &same);
    assert_eq!(
        Exploit::from_json(&fs::read_to_string(same.join("extended.json")).unwrap()).unwrap(),
        Exploit::from_json(&fs::read_to_string(&short).unwrap()).unwrap()
    );
    let patched = out.join("patched");
    run(&["extend", short.to_str().unwrap(), "--target", "geth-legacy-reduced(16,16,8,0)"], &patched);
    let trace: DivergenceTrace =
        serde_json::from_str(&fs::read_to_string(patched.join("divergence.json")).unwrap()).unwrap();
    assert_eq!(trace.pattern, Some(Pattern::XT3));
    assert!(!trace.divergence.is_empty());
}

#[test]
fn replay_reports() {
    let out = scratch("replay");
    run(&["replay", "--preset", "geth-legacy-reduced(6)", "--blocks", "5"], &out);
    let none: ReplayReport = serde_json::from_str(&fs::read_to_string(out.join("replay.json")).unwrap()).unwrap();
    assert_eq!(none.success_rate, 0.0);
    assert_eq!(none.series.len(), 5);
    let lock = out.join("lock");
    run(&["eval", "--preset", "reth-fifo-reduced(16,16,16,16)", "--pattern", "XT8", "--blocks", "20"], &lock);
    let r: ReplayReport = serde_json::from_str(&fs::read_to_string(lock.join("replay.json")).unwrap()).unwrap();
    assert!(r.success_rate > 0.9, "{}", r.success_rate);
    let replayed = out.join("again");
    run(&["replay", lock.join("XT8.json").to_str().unwrap(), "--blocks", "20"], &replayed);
    let again: ReplayReport =
        serde_json::from_str(&fs::read_to_string(replayed.join("replay.json")).unwrap()).unwrap();
    assert_eq!(again, r);
    let csv = fs::read_to_string(replayed.join("series.csv")).unwrap();
    assert!(csv.starts_with("block,gas_used,benign_fees"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn eval_matrix_and_compare() {
    let out = scratch("matrix");
    run(&["eval"], &out);
    let m = fs::read_to_string(out.join("matrix.csv")).unwrap();
    assert_eq!(m.lines().count(), 1 + 8 * 9);
    assert!(m.lines().any(|l| l.starts_with("geth-legacy,XT1,present,true")), "{m}");
    run(
        &["compare", "--presets", "geth-1.11-reduced(3,1,2,2)", "--baselines", "mpfuzz", "--repeats", "1", "--epsilon", "0.0001"],
        &out,
    );
    let c = fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(c.lines().count(), 2);
    let row = c.lines().nth(1).unwrap();
    assert!(row.starts_with("mpfuzz,\"geth-1.11-reduced(3,1,2,2)\",3,0,") && row.ends_with(",true"), "{c}");
}
