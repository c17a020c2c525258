//! Symbolized stateful fuzzing of mempool admission policies.
//!
//! The crate models Ethereum-style mempools as deterministic state machines
//! ([`mempool`]), abstracts their states into short symbol strings
//! ([`symbolic`]), and searches those strings for asymmetric
//! denial-of-service timelines ([`fuzzer`], [`oracle`]). Discovered short
//! exploits can be extended to full-size pools and replayed against block
//! building workloads ([`exploitkit`]).

pub mod baselines;
pub mod cli;
pub mod exploitkit;
pub mod fuzzer;
pub mod mempool;
pub mod oracle;
pub mod symbolic;
pub mod txmodel;

pub use mempool::{admit, new_pool, policy_preset, AdmissionOutcome, MempoolPolicy, MempoolState};
pub use txmodel::{fee, Address, Transaction, WorldState};
