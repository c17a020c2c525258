//! Every named pattern against every preset at sixteen slots, next to the
//! expected presence of the vulnerability.
//!
//! cargo run --example vulnerability_matrix

use mpfuzz::exploitkit::{evaluate_xt, matrix_policy, vulnerability_matrix, Pattern, XtParams};
use mpfuzz::mempool::preset_names;
use mpfuzz::oracle::OracleConfig;

fn main() {
    let cfg = OracleConfig::default();
    print!("{:18}", "");
    for p in Pattern::ALL {
        print!(" {:>6}", p.to_string());
    }
    println!();
    for base in preset_names() {
        let policy = matrix_policy(base).unwrap();
        print!("{base:18}");
        for (p, want) in Pattern::ALL.iter().zip(vulnerability_matrix(base)) {
            let cell = match evaluate_xt(*p, &policy, &XtParams::default(), &cfg) {
                Ok((ex, _)) if ex.verdict.triggered => format!("{:.3}", ex.verdict.asym_f64()),
                Ok(_) => "-".to_string(),
                Err(_) => "n/a".to_string(),
            };
            let mark = match want {
                Some(true) => '+',
                Some(false) => '!',
                None => ' ',
            };
            print!(" {cell:>5}{mark}");
        }
        println!();
    }
    println!("asym when triggered; + expected vulnerable, ! expected patched");
}
