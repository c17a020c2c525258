//! Eviction and locking bug oracles.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mempool::MempoolState;
use crate::txmodel::{total_fee, Address, Transaction};

pub type Asym = Ratio<u128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("initial state carries no fees")]
    ZeroBaseline,
    #[error("no declined transactions to compare against")]
    EmptyDeclined,
    #[error("bound must be a decimal in (0, 1], got {0}")]
    BadBound(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub epsilon: f64,
    pub lambda: f64,
    /// Benign probes appended to locking timelines; `None` means `m`.
    pub probes: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { epsilon: 0.36, lambda: 0.46, probes: None }
    }
}

impl OracleConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        OracleConfig { epsilon, ..Default::default() }
    }

    pub fn epsilon_ratio(&self) -> Asym {
        to_ratio(self.epsilon)
    }

    pub fn lambda_ratio(&self) -> Asym {
        to_ratio(self.lambda)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        for v in [self.epsilon, self.lambda] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(OracleError::BadBound(v.to_string()));
            }
        }
        Ok(())
    }
}

/// Exact rational for a decimal bound, read from its shortest decimal form.
pub fn to_ratio(v: f64) -> Asym {
    let s = format!("{v}");
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let den = 10u128.pow(frac.len() as u32);
    let num: u128 = format!("{int}{frac}").parse().unwrap_or(0);
    Ratio::new(num, den)
}

/// Decimal rendering with `digits` fractional digits, truncated.
pub fn decimal(r: &Asym, digits: u32) -> String {
    let int = r.numer() / r.denom();
    let mut rem = r.numer() % r.denom();
    let mut s = format!("{int}.");
    for _ in 0..digits {
        rem *= 10;
        s.push(char::from(b'0' + (rem / r.denom()) as u8));
        rem %= r.denom();
    }
    s
}

pub fn to_f64(r: &Asym) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OracleKind {
    Eviction,
    Locking,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub triggered: bool,
    pub kind: OracleKind,
    #[serde(with = "ratio_repr")]
    pub asym: Asym,
    pub damage_ok: bool,
    pub cost_ok: bool,
}

impl OracleVerdict {
    pub fn asym_f64(&self) -> f64 {
        to_f64(&self.asym)
    }
}

mod ratio_repr {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        numer: String,
        denom: String,
        decimal: String,
    }

    pub fn serialize<S: Serializer>(r: &Asym, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            numer: r.numer().to_string(),
            denom: r.denom().to_string(),
            decimal: decimal(r, 18),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Asym, D::Error> {
        let r = Repr::deserialize(d)?;
        let n = r.numer.parse().map_err(serde::de::Error::custom)?;
        let den: u128 = r.denom.parse().map_err(serde::de::Error::custom)?;
        if den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Ratio::new(n, den))
    }
}

/// Adversarial transactions whose fees a validator would actually collect:
/// chain-connected from the confirmed nonce with cumulative value within
/// the balance. Futures and (latent) overdrafts count for nothing.
pub fn chargeable(state: &MempoolState) -> Vec<Transaction> {
    state.executable().into_iter().filter(|t| !t.sender.is_benign()).collect()
}

/// `Σ fee(stn) / Σ fee(st0)` where `stn` is already restricted to chargeable txs.
pub fn asym_e(st0: &[Transaction], stn: &[Transaction]) -> Result<Asym, OracleError> {
    let base = total_fee(st0);
    if base == 0 {
        return Err(OracleError::ZeroBaseline);
    }
    Ok(Ratio::new(total_fee(stn), base))
}

/// Average chargeable fee per resident slot over average declined fee.
pub fn asym_d(stn_chargeable: &[Transaction], stn_len: usize, dcn: &[Transaction]) -> Result<Asym, OracleError> {
    let dc = total_fee(dcn);
    if dcn.is_empty() || dc == 0 || stn_len == 0 {
        return Err(OracleError::EmptyDeclined);
    }
    Ok(Ratio::new(total_fee(stn_chargeable) * dcn.len() as u128, dc * stn_len as u128))
}

pub fn check_eviction(st0: &[Transaction], end: &MempoolState, cfg: &OracleConfig) -> OracleVerdict {
    let resident: BTreeSet<Transaction> = end.txs().into_iter().collect();
    let damage_ok = st0.iter().all(|t| t.sender.is_benign() && !resident.contains(t));
    let asym = asym_e(st0, &chargeable(end)).unwrap_or(Ratio::new(1, 1));
    let cost_ok = asym < cfg.epsilon_ratio();
    OracleVerdict { triggered: damage_ok && cost_ok, kind: OracleKind::Eviction, asym, damage_ok, cost_ok }
}

/// `end` is the pool after the attack and the benign probes; `dcn` holds
/// the declined probes.
pub fn check_locking(end: &MempoolState, dcn: &[Transaction], cfg: &OracleConfig) -> OracleVerdict {
    let stn = end.txs();
    let stn_senders: BTreeSet<Address> = stn.iter().map(|t| t.sender).collect();
    let damage_ok = !stn.is_empty()
        && !dcn.is_empty()
        && stn.iter().all(|t| !t.sender.is_benign())
        && dcn.iter().all(|t| t.sender.is_benign())
        && dcn.iter().all(|t| !stn_senders.contains(&t.sender));
    let asym = asym_d(&chargeable(end), stn.len(), dcn).unwrap_or(Ratio::new(1, 1));
    let cost_ok = asym < cfg.lambda_ratio();
    OracleVerdict { triggered: damage_ok && cost_ok, kind: OracleKind::Locking, asym, damage_ok, cost_ok }
}

/// Count-based oracle used for the baseline comparison: the pool holds no
/// benign tx and exactly `m - 1` invalid ones.
pub fn check_deter(end: &MempoolState) -> bool {
    let txs = end.txs();
    let valid = end.executable().len();
    txs.len() == end.capacity()
        && txs.iter().all(|t| !t.sender.is_benign())
        && txs.len() - valid == end.capacity() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TpFp {
    TruePositive,
    FalsePositive,
}

/// A short exploit is a true positive iff its extension also causes full
/// damage within the bound on the full-size pool.
pub fn classify_tp_fp(short: &OracleVerdict, extended: &OracleVerdict, cfg: &OracleConfig) -> TpFp {
    let bound = match extended.kind {
        OracleKind::Eviction => cfg.epsilon_ratio(),
        OracleKind::Locking => cfg.lambda_ratio(),
    };
    if short.triggered && extended.damage_ok && extended.asym < bound {
        TpFp::TruePositive
    } else {
        TpFp::FalsePositive
    }
}
