//! Transactions, accounts and per-transaction validity classification.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Every modeled transaction is a plain transfer.
pub const GAS: u64 = 21_000;

/// Balance given to benign accounts that have no explicit entry.
pub const BENIGN_BALANCE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Benign,
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address {
    pub role: Role,
    pub index: u32,
}

impl Address {
    pub const fn benign(index: u32) -> Self {
        Address { role: Role::Benign, index }
    }

    pub const fn adversarial(index: u32) -> Self {
        Address { role: Role::Adversarial, index }
    }

    pub fn is_benign(&self) -> bool {
        self.role == Role::Benign
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Benign => write!(f, "B{}", self.index),
            Role::Adversarial => write!(f, "A{}", self.index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub sender: Address,
    pub nonce: u64,
    pub value: u64,
    pub gas_price: u64,
}

impl Transaction {
    pub fn new(sender: Address, nonce: u64, value: u64, gas_price: u64) -> Self {
        debug_assert!(nonce >= 1, "nonces start at 1");
        Transaction { sender, nonce, value, gas_price }
    }

    pub fn gas(&self) -> u64 {
        GAS
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx[{}, n{}, v{}, f{}]", self.sender, self.nonce, self.value, self.gas_price)
    }
}

/// `gas_price × 21000`.
pub fn fee(tx: &Transaction) -> u128 {
    tx.gas_price as u128 * GAS as u128
}

pub fn total_fee<'a>(txs: impl IntoIterator<Item = &'a Transaction>) -> u128 {
    txs.into_iter().map(fee).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountState {
    pub balance: u64,
    pub confirmed_nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    #[serde(with = "account_list")]
    pub accounts: BTreeMap<Address, AccountState>,
    pub adversarial_balance_default: u64,
    pub benign_balance_default: u64,
}

impl WorldState {
    /// A fresh world where every adversarial account holds `m` Ether.
    pub fn new(m: u64) -> Self {
        WorldState {
            accounts: BTreeMap::new(),
            adversarial_balance_default: m,
            benign_balance_default: BENIGN_BALANCE,
        }
    }

    pub fn account(&self, addr: &Address) -> AccountState {
        self.accounts.get(addr).copied().unwrap_or(AccountState {
            balance: match addr.role {
                Role::Benign => self.benign_balance_default,
                Role::Adversarial => self.adversarial_balance_default,
            },
            confirmed_nonce: 0,
        })
    }

    pub fn account_mut(&mut self, addr: &Address) -> &mut AccountState {
        let default = self.account(addr);
        self.accounts.entry(*addr).or_insert(default)
    }

    /// Materializes the default entry so the account shows up in serialized form.
    pub fn touch(&mut self, addr: &Address) {
        self.account_mut(addr);
    }
}

mod account_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        address: Address,
        #[serde(flatten)]
        state: AccountState,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Address, AccountState>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = map.iter().map(|(a, st)| Entry { address: *a, state: *st }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Address, AccountState>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| (e.address, e.state)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidityClass {
    Pending,
    Future,
    Overdraft,
    LatentOverdraft,
    Replacement,
}

/// Length of the run of consecutive nonces in `resident` starting at `confirmed + 1`.
pub fn chain_len(confirmed: u64, resident: &[Transaction]) -> u64 {
    let mut next = confirmed + 1;
    for tx in resident {
        if tx.nonce == next {
            next += 1;
        } else if tx.nonce > next {
            break;
        }
    }
    next - confirmed - 1
}

/// Classifies `tx` against the sender's resident transactions (sorted by nonce).
pub fn classify(tx: &Transaction, world: &WorldState, resident: &[Transaction]) -> ValidityClass {
    debug_assert!(resident.iter().all(|r| r.sender == tx.sender));
    if resident.iter().any(|r| r.nonce == tx.nonce) {
        return ValidityClass::Replacement;
    }
    let acct = world.account(&tx.sender);
    let chain = chain_len(acct.confirmed_nonce, resident);
    if tx.nonce > acct.confirmed_nonce + chain + 1 {
        return ValidityClass::Future;
    }
    if tx.value > acct.balance {
        return ValidityClass::Overdraft;
    }
    let ancestors: u64 = resident
        .iter()
        .filter(|r| r.nonce > acct.confirmed_nonce && r.nonce < tx.nonce)
        .map(|r| r.value)
        .sum();
    if tx.value + ancestors > acct.balance {
        return ValidityClass::LatentOverdraft;
    }
    ValidityClass::Pending
}
