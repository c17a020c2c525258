//! Deterministic, policy-parameterized mempool state machine.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::txmodel::{classify, chain_len, Address, Transaction, ValidityClass, WorldState, GAS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MempoolError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot fill {k} normal transactions into a pool with {free} free slots")]
    FillOverflow { k: usize, free: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvictionRule {
    PriceAny,
    PriceChildlessOnly,
    AccountMinPrice,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurningRule {
    DemoteToFuture,
    DropDescendants,
}

/// What happens when a sender over `sender_limit` sends another pending tx
/// while the pool holds more than `sender_limit_threshold` pending txs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SenderLimitAction {
    Decline,
    EvictOwnHighest,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MempoolPolicy {
    pub name: String,
    pub capacity: usize,
    pub future_quota: usize,
    pub sender_limit: usize,
    pub sender_limit_threshold: usize,
    pub eviction_rule: EvictionRule,
    pub turning_rule: TurningRule,
    pub replacement_allowed: bool,
    pub replacement_overdraft_guard: bool,
    pub reversal_guard: bool,
    /// Whether an arriving future tx may displace a pending one.
    pub futures_evict_pending: bool,
    /// Decline arrivals whose cumulative sender spend exceeds the balance.
    pub cumulative_balance_check: bool,
    pub sender_limit_action: SenderLimitAction,
}

impl MempoolPolicy {
    pub fn validate(&self) -> Result<(), MempoolError> {
        let m = self.capacity;
        let bad = |s: String| Err(MempoolError::InvalidPolicy(s));
        if m == 0 {
            return bad("capacity must be positive".into());
        }
        if self.future_quota > m {
            return bad(format!("future_quota {} exceeds capacity {m}", self.future_quota));
        }
        if self.sender_limit == 0 || self.sender_limit > m {
            return bad(format!("sender_limit {} outside 1..={m}", self.sender_limit));
        }
        if self.sender_limit_threshold > m {
            return bad(format!(
                "sender_limit_threshold {} exceeds capacity {m}",
                self.sender_limit_threshold
            ));
        }
        Ok(())
    }

    pub fn m(&self) -> u64 {
        self.capacity as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeclineReason {
    FullNoVictim,
    QuotaFuture,
    SenderLimit,
    PriceTooLow,
    OverdraftGuard,
    ReversalGuard,
    StaleNonce,
    Underpriced,
}

impl fmt::Display for DeclineReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissionOutcome {
    AdmittedNoEvict,
    AdmittedEvicting(Vec<Transaction>),
    Declined(DeclineReason),
}

impl AdmissionOutcome {
    pub fn admitted(&self) -> bool {
        !matches!(self, AdmissionOutcome::Declined(_))
    }

    pub fn evicted(&self) -> &[Transaction] {
        match self {
            AdmissionOutcome::AdmittedEvicting(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub tx: Transaction,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MempoolState {
    pub policy: MempoolPolicy,
    pub world: WorldState,
    slots: BTreeMap<Address, BTreeMap<u64, Slot>>,
    len: usize,
    /// Resident futures, kept in step with `slots`.
    futures: usize,
    pub declined: Vec<(Transaction, DeclineReason)>,
    seq: u64,
    next_benign: u32,
    /// Minimum admissible price (a protocol base price); 0 disables it.
    pub price_floor: u64,
}

/// Canonical serialized form: slots sorted by sender then nonce.
#[derive(Serialize, Deserialize)]
struct StateRepr<'a> {
    policy: std::borrow::Cow<'a, MempoolPolicy>,
    world: std::borrow::Cow<'a, WorldState>,
    slots: Vec<Slot>,
    declined: std::borrow::Cow<'a, [(Transaction, DeclineReason)]>,
    seq: u64,
    next_benign: u32,
    price_floor: u64,
}

impl Serialize for MempoolState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateRepr {
            policy: std::borrow::Cow::Borrowed(&self.policy),
            world: std::borrow::Cow::Borrowed(&self.world),
            slots: self.slots.values().flat_map(|m| m.values().copied()).collect(),
            declined: std::borrow::Cow::Borrowed(&self.declined),
            seq: self.seq,
            next_benign: self.next_benign,
            price_floor: self.price_floor,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MempoolState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = StateRepr::deserialize(d)?;
        let mut slots: BTreeMap<Address, BTreeMap<u64, Slot>> = BTreeMap::new();
        let mut len = 0;
        for s in r.slots {
            slots.entry(s.tx.sender).or_default().insert(s.tx.nonce, s);
            len += 1;
        }
        let mut state = MempoolState {
            policy: r.policy.into_owned(),
            world: r.world.into_owned(),
            slots,
            len,
            futures: 0,
            declined: r.declined.into_owned(),
            seq: r.seq,
            next_benign: r.next_benign,
            price_floor: r.price_floor,
        };
        state.futures = state.slots.keys().map(|a| state.sender_futures(a)).sum();
        Ok(state)
    }
}

/// Resident view used by victim selection.
#[derive(Debug, Clone, Copy)]
struct Resident {
    tx: Transaction,
    seq: u64,
    future: bool,
}

pub fn new_pool(policy: MempoolPolicy, world: WorldState) -> Result<MempoolState, MempoolError> {
    policy.validate()?;
    Ok(MempoolState {
        policy,
        world,
        slots: BTreeMap::new(),
        len: 0,
        futures: 0,
        declined: Vec::new(),
        seq: 0,
        next_benign: 1,
        price_floor: 0,
    })
}

impl MempoolState {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.policy.capacity
    }

    /// Resident transactions sorted by sender then nonce.
    pub fn txs(&self) -> Vec<Transaction> {
        self.slots.values().flat_map(|m| m.values().map(|s| s.tx)).collect()
    }

    /// Resident slots with insertion sequence numbers, sorted by sender then nonce.
    pub fn slots(&self) -> Vec<Slot> {
        self.slots.values().flat_map(|m| m.values().copied()).collect()
    }

    pub fn senders(&self) -> impl Iterator<Item = &Address> {
        self.slots.keys()
    }

    pub fn sender_txs(&self, addr: &Address) -> Vec<Transaction> {
        self.slots
            .get(addr)
            .map(|m| m.values().map(|s| s.tx).collect())
            .unwrap_or_default()
    }

    pub fn contains(&self, tx: &Transaction) -> bool {
        self.slots
            .get(&tx.sender)
            .and_then(|m| m.get(&tx.nonce))
            .is_some_and(|s| s.tx == *tx)
    }

    pub fn next_benign_index(&self) -> u32 {
        self.next_benign
    }

    /// Number of resident txs of `addr` that form the consecutive chain from
    /// the confirmed nonce.
    pub fn chain_count(&self, addr: &Address) -> usize {
        let Some(m) = self.slots.get(addr) else { return 0 };
        let confirmed = self.world.account(addr).confirmed_nonce;
        let mut next = confirmed + 1;
        while m.contains_key(&next) {
            next += 1;
        }
        (next - confirmed - 1) as usize
    }

    /// Whether a resident tx sits on its sender's consecutive nonce chain.
    pub fn is_connected(&self, tx: &Transaction) -> bool {
        let confirmed = self.world.account(&tx.sender).confirmed_nonce;
        tx.nonce > confirmed && tx.nonce <= confirmed + self.chain_count(&tx.sender) as u64
    }

    pub fn future_count(&self) -> usize {
        self.futures
    }

    fn sender_futures(&self, addr: &Address) -> usize {
        self.slots.get(addr).map_or(0, |m| m.len() - self.chain_count(addr))
    }

    pub fn pending_like_count(&self) -> usize {
        self.len - self.future_count()
    }

    /// Resident txs that a block builder could include right now, i.e.
    /// chain-connected with cumulative value within the balance.
    pub fn executable(&self) -> Vec<Transaction> {
        let mut out = Vec::new();
        for (addr, m) in &self.slots {
            let acct = self.world.account(addr);
            let mut next = acct.confirmed_nonce + 1;
            let mut spent = 0u64;
            while let Some(s) = m.get(&next) {
                spent = spent.saturating_add(s.tx.value);
                if spent > acct.balance {
                    break;
                }
                out.push(s.tx);
                next += 1;
            }
        }
        out
    }

    fn residents(&self) -> Vec<Resident> {
        let mut out = Vec::with_capacity(self.len);
        for (addr, m) in &self.slots {
            let chain = self.chain_count(addr) as u64;
            let confirmed = self.world.account(addr).confirmed_nonce;
            for s in m.values() {
                out.push(Resident {
                    tx: s.tx,
                    seq: s.seq,
                    future: s.tx.nonce > confirmed + chain,
                });
            }
        }
        out
    }

    fn insert(&mut self, tx: Transaction) {
        let before = self.sender_futures(&tx.sender);
        self.seq += 1;
        let slot = Slot { tx, seq: self.seq };
        if self.slots.entry(tx.sender).or_default().insert(tx.nonce, slot).is_none() {
            self.len += 1;
        }
        self.world.touch(&tx.sender);
        self.futures = self.futures - before + self.sender_futures(&tx.sender);
    }

    fn remove(&mut self, addr: &Address, nonce: u64) -> Option<Transaction> {
        let before = self.sender_futures(addr);
        let m = self.slots.get_mut(addr)?;
        let s = m.remove(&nonce)?;
        if m.is_empty() {
            self.slots.remove(addr);
        }
        self.len -= 1;
        self.futures = self.futures - before + self.sender_futures(addr);
        Some(s.tx)
    }

    fn decline(&mut self, tx: Transaction, reason: DeclineReason) -> AdmissionOutcome {
        self.declined.push((tx, reason));
        AdmissionOutcome::Declined(reason)
    }

    /// The three-way admission transition: admit with eviction, admit
    /// without eviction, or decline.
    pub fn admit(&mut self, tx: Transaction) -> AdmissionOutcome {
        let p = self.policy.clone();
        let acct = self.world.account(&tx.sender);
        if tx.nonce <= acct.confirmed_nonce {
            return self.decline(tx, DeclineReason::StaleNonce);
        }
        if tx.gas_price < self.price_floor {
            return self.decline(tx, DeclineReason::Underpriced);
        }
        let resident = self.sender_txs(&tx.sender);
        let class = classify(&tx, &self.world, &resident);

        if class == ValidityClass::Replacement {
            return self.replace(tx, &resident);
        }
        match class {
            ValidityClass::Overdraft => return self.decline(tx, DeclineReason::OverdraftGuard),
            ValidityClass::LatentOverdraft if p.cumulative_balance_check => {
                return self.decline(tx, DeclineReason::OverdraftGuard)
            }
            _ => {}
        }
        let arrival_future = class == ValidityClass::Future;
        if arrival_future && self.future_count() >= p.future_quota {
            return self.decline(tx, DeclineReason::QuotaFuture);
        }

        let mut evicted = Vec::new();
        if !arrival_future
            && self.chain_count(&tx.sender) >= p.sender_limit
            && self.pending_like_count() > p.sender_limit_threshold
        {
            match p.sender_limit_action {
                SenderLimitAction::Decline => {
                    return self.decline(tx, DeclineReason::SenderLimit)
                }
                SenderLimitAction::EvictOwnHighest => {
                    let top = *resident.last().expect("sender over limit has residents");
                    self.remove(&top.sender, top.nonce);
                    evicted.push(top);
                }
            }
        }

        if self.len < p.capacity {
            self.insert(tx);
            self.enforce_future_quota(&tx, &mut evicted);
            return if evicted.is_empty() {
                AdmissionOutcome::AdmittedNoEvict
            } else {
                AdmissionOutcome::AdmittedEvicting(evicted)
            };
        }

        let victim = match self.select_victim(&tx, arrival_future) {
            Ok(v) => v,
            Err(reason) => return self.decline(tx, reason),
        };
        if p.reversal_guard && victim.gas_price >= tx.gas_price {
            return self.decline(tx, DeclineReason::ReversalGuard);
        }
        self.remove(&victim.sender, victim.nonce);
        evicted.push(victim);
        if p.turning_rule == TurningRule::DropDescendants {
            let drop: Vec<u64> = self
                .sender_txs(&victim.sender)
                .iter()
                .filter(|t| t.nonce > victim.nonce)
                .map(|t| t.nonce)
                .collect();
            for n in drop {
                if let Some(t) = self.remove(&victim.sender, n) {
                    evicted.push(t);
                }
            }
        }
        self.insert(tx);
        self.enforce_future_quota(&tx, &mut evicted);
        AdmissionOutcome::AdmittedEvicting(evicted)
    }

    fn replace(&mut self, tx: Transaction, resident: &[Transaction]) -> AdmissionOutcome {
        let p = &self.policy;
        let old = *resident.iter().find(|r| r.nonce == tx.nonce).expect("replacement target");
        if !p.replacement_allowed || tx.gas_price <= old.gas_price {
            return self.decline(tx, DeclineReason::PriceTooLow);
        }
        let acct = self.world.account(&tx.sender);
        if tx.value > acct.balance {
            return self.decline(tx, DeclineReason::OverdraftGuard);
        }
        if p.replacement_overdraft_guard {
            let swapped: Vec<Transaction> =
                resident.iter().map(|r| if r.nonce == tx.nonce { tx } else { *r }).collect();
            if turns_latent(&self.world, resident, &swapped) {
                return self.decline(tx, DeclineReason::OverdraftGuard);
            }
        }
        self.remove(&old.sender, old.nonce);
        self.insert(tx);
        AdmissionOutcome::AdmittedEvicting(vec![old])
    }

    fn select_victim(
        &self,
        arrival: &Transaction,
        arrival_future: bool,
    ) -> Result<Transaction, DeclineReason> {
        let p = &self.policy;
        let mut res = self.residents();
        if arrival_future && !p.futures_evict_pending {
            res.retain(|r| r.future);
            if res.is_empty() {
                return Err(DeclineReason::FullNoVictim);
            }
        }
        let key = |r: &&Resident| (r.tx.gas_price, r.seq);
        match p.eviction_rule {
            EvictionRule::None => Err(DeclineReason::FullNoVictim),
            EvictionRule::PriceAny => {
                let cands: Vec<&Resident> = res
                    .iter()
                    .filter(|r| r.tx.gas_price < arrival.gas_price)
                    .filter(|r| {
                        p.turning_rule != TurningRule::DropDescendants
                            || r.tx.sender != arrival.sender
                            || r.tx.nonce > arrival.nonce
                    })
                    .collect();
                let fut = cands.iter().copied().filter(|r| r.future).min_by_key(key);
                fut.or_else(|| cands.iter().copied().min_by_key(key))
                    .map(|r| r.tx)
                    .ok_or(DeclineReason::PriceTooLow)
            }
            EvictionRule::PriceChildlessOnly => {
                let tops = self.tops(&res, arrival);
                tops.iter()
                    .filter(|r| r.tx.gas_price < arrival.gas_price)
                    .min_by_key(key)
                    .map(|r| r.tx)
                    .ok_or(DeclineReason::PriceTooLow)
            }
            EvictionRule::AccountMinPrice => {
                // key: the account's cheapest resident tx; victim: its childless tx
                let mut best: Option<(u64, u64, Transaction)> = None;
                for top in self.tops(&res, arrival) {
                    let key = res
                        .iter()
                        .filter(|r| r.tx.sender == top.tx.sender)
                        .map(|r| (r.tx.gas_price, r.seq))
                        .min()
                        .expect("account has residents");
                    if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                        best = Some((key.0, key.1, top.tx));
                    }
                }
                let (key, _, victim) = best.ok_or(DeclineReason::FullNoVictim)?;
                let effective = self
                    .sender_txs(&arrival.sender)
                    .iter()
                    .filter(|t| t.nonce > arrival.nonce)
                    .map(|t| t.gas_price)
                    .fold(arrival.gas_price, u64::max);
                if effective > key {
                    Ok(victim)
                } else {
                    Err(DeclineReason::PriceTooLow)
                }
            }
        }
    }

    /// The highest-nonce resident of every sender other than the arrival's.
    fn tops(&self, res: &[Resident], arrival: &Transaction) -> Vec<Resident> {
        let mut tops: BTreeMap<Address, Resident> = BTreeMap::new();
        for r in res.iter().filter(|r| r.tx.sender != arrival.sender) {
            let e = tops.entry(r.tx.sender).or_insert(*r);
            if r.tx.nonce > e.tx.nonce {
                *e = *r;
            }
        }
        tops.into_values().collect()
    }

    /// Evicts futures (never the arrival) until the quota holds again.
    /// Cheapest first; among equal prices the most recently inserted goes.
    fn enforce_future_quota(&mut self, arrival: &Transaction, evicted: &mut Vec<Transaction>) {
        let quota = self.policy.future_quota;
        while self.future_count() > quota {
            let victim = self
                .residents()
                .into_iter()
                .filter(|r| r.future && r.tx != *arrival)
                .min_by(|a, b| {
                    a.tx.gas_price.cmp(&b.tx.gas_price).then(b.seq.cmp(&a.seq))
                });
            let Some(v) = victim else { break };
            self.remove(&v.tx.sender, v.tx.nonce);
            evicted.push(v.tx);
        }
    }

    /// Admits `k` normal transactions from fresh benign senders.
    pub fn fill_normal(&mut self, k: usize) -> Result<(), MempoolError> {
        let free = self.capacity() - self.len;
        if k > free {
            return Err(MempoolError::FillOverflow { k, free });
        }
        for _ in 0..k {
            let tx = self.next_normal_tx(3);
            let out = self.admit(tx);
            debug_assert_eq!(out, AdmissionOutcome::AdmittedNoEvict);
        }
        Ok(())
    }

    /// A normal transaction from the next unused benign sender.
    pub fn next_normal_tx(&mut self, price: u64) -> Transaction {
        let tx = Transaction::new(Address::benign(self.next_benign), 1, 1, price);
        self.next_benign += 1;
        tx
    }

    /// Greedily packs executable transactions by descending price.
    pub fn build_block(&mut self, block_gas_limit: u64) -> Vec<Transaction> {
        let mut block = Vec::new();
        let mut gas = 0u64;
        while gas + GAS <= block_gas_limit {
            let mut best: Option<Slot> = None;
            for (addr, m) in &self.slots {
                let acct = self.world.account(addr);
                let Some(s) = m.get(&(acct.confirmed_nonce + 1)) else { continue };
                if s.tx.value > acct.balance || s.tx.gas_price < self.price_floor {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => (s.tx.gas_price, std::cmp::Reverse(s.seq))
                        > (b.tx.gas_price, std::cmp::Reverse(b.seq)),
                };
                if better {
                    best = Some(*s);
                }
            }
            let Some(s) = best else { break };
            let (total, before) = (self.futures, self.sender_futures(&s.tx.sender));
            self.remove(&s.tx.sender, s.tx.nonce);
            let a = self.world.account_mut(&s.tx.sender);
            a.confirmed_nonce = s.tx.nonce;
            a.balance -= s.tx.value;
            self.futures = total - before + self.sender_futures(&s.tx.sender);
            gas += GAS;
            block.push(s.tx);
        }
        block
    }

    /// Rewrites the price of the resident (and declined-log) copy of a
    /// transaction. Used by the symbolic layer to keep rank-assigned prices
    /// consistent; callers must preserve relative price order.
    pub fn reprice(&mut self, addr: &Address, nonce: u64, old: u64, new: u64) {
        if let Some(s) = self.slots.get_mut(addr).and_then(|m| m.get_mut(&nonce)) {
            if s.tx.gas_price == old {
                s.tx.gas_price = new;
            }
        }
        for (t, _) in &mut self.declined {
            if t.sender == *addr && t.nonce == nonce && t.gas_price == old {
                t.gas_price = new;
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }
}

/// True when swapping `before` for `after` moves a previously spendable
/// descendant over the balance.
fn turns_latent(world: &WorldState, before: &[Transaction], after: &[Transaction]) -> bool {
    let acct = world.account(&before[0].sender);
    let spendable = |txs: &[Transaction]| -> usize {
        let chain = chain_len(acct.confirmed_nonce, txs) as usize;
        let mut spent = 0u64;
        let mut ok = 0;
        for t in txs.iter().take(chain) {
            spent += t.value;
            if spent > acct.balance {
                break;
            }
            ok += 1;
        }
        ok
    };
    spendable(after) < spendable(before)
}

/// Pure form of [`MempoolState::admit`].
pub fn admit(state: &MempoolState, tx: Transaction) -> (MempoolState, AdmissionOutcome) {
    let mut next = state.clone();
    let out = next.admit(tx);
    (next, out)
}

const BASE_PRESETS: [&str; 8] = [
    "geth-legacy",
    "geth-1.11",
    "nethermind-legacy",
    "nethermind-1.18",
    "besu-legacy",
    "besu-22.7",
    "reth-fifo",
    "openethereum",
];

pub fn preset_names() -> &'static [&'static str] {
    &BASE_PRESETS
}

fn full_preset(name: &str) -> Option<MempoolPolicy> {
    let m = 6144;
    let geth = MempoolPolicy {
        name: name.to_string(),
        capacity: m,
        future_quota: 1024,
        sender_limit: 16,
        sender_limit_threshold: 5120,
        eviction_rule: EvictionRule::PriceAny,
        turning_rule: TurningRule::DemoteToFuture,
        replacement_allowed: true,
        replacement_overdraft_guard: false,
        reversal_guard: false,
        futures_evict_pending: true,
        cumulative_balance_check: false,
        sender_limit_action: SenderLimitAction::EvictOwnHighest,
    };
    let p = match name {
        "geth-legacy" => MempoolPolicy { future_quota: m, ..geth },
        "geth-1.11" => MempoolPolicy {
            futures_evict_pending: false,
            cumulative_balance_check: true,
            replacement_overdraft_guard: true,
            sender_limit_action: SenderLimitAction::Decline,
            ..geth
        },
        "besu-legacy" => MempoolPolicy {
            future_quota: m,
            sender_limit_threshold: 0,
            turning_rule: TurningRule::DropDescendants,
            sender_limit_action: SenderLimitAction::Decline,
            ..geth
        },
        "besu-22.7" => MempoolPolicy {
            future_quota: m,
            sender_limit_threshold: 0,
            turning_rule: TurningRule::DropDescendants,
            sender_limit_action: SenderLimitAction::Decline,
            futures_evict_pending: false,
            ..geth
        },
        "nethermind-legacy" => MempoolPolicy {
            future_quota: m,
            sender_limit: m,
            sender_limit_threshold: m,
            eviction_rule: EvictionRule::AccountMinPrice,
            sender_limit_action: SenderLimitAction::Decline,
            ..geth
        },
        "nethermind-1.18" => MempoolPolicy {
            future_quota: m,
            sender_limit: m,
            sender_limit_threshold: m,
            eviction_rule: EvictionRule::AccountMinPrice,
            sender_limit_action: SenderLimitAction::Decline,
            reversal_guard: true,
            futures_evict_pending: false,
            ..geth
        },
        "reth-fifo" => MempoolPolicy {
            future_quota: m,
            sender_limit: m,
            sender_limit_threshold: m,
            eviction_rule: EvictionRule::None,
            sender_limit_action: SenderLimitAction::Decline,
            ..geth
        },
        "openethereum" => MempoolPolicy {
            future_quota: m,
            sender_limit_threshold: 0,
            eviction_rule: EvictionRule::PriceChildlessOnly,
            sender_limit_action: SenderLimitAction::Decline,
            ..geth
        },
        _ => return None,
    };
    Some(p)
}

/// Resolves a preset name, optionally with a `-reduced(m)` or
/// `-reduced(m,py1,py2,py3)` suffix.
pub fn policy_preset(name: &str) -> Result<MempoolPolicy, MempoolError> {
    let unknown = || MempoolError::UnknownPreset(name.to_string());
    let Some(idx) = name.find("-reduced(") else {
        return full_preset(name).ok_or_else(unknown);
    };
    let base = &name[..idx];
    let args = name[idx + "-reduced(".len()..].strip_suffix(')').ok_or_else(unknown)?;
    let nums: Vec<usize> = args
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| unknown())?;
    let full = full_preset(base).ok_or_else(unknown)?;
    let p = match nums[..] {
        [m] => scale(&full, m),
        [m, py1, py2, py3] => MempoolPolicy {
            capacity: m,
            future_quota: py1,
            sender_limit: py2,
            sender_limit_threshold: py3,
            ..full.clone()
        },
        _ => return Err(unknown()),
    };
    let p = MempoolPolicy { name: name.to_string(), ..p };
    p.validate()?;
    Ok(p)
}

/// Shrinks a full-size preset to capacity `m`, keeping the py ratios.
fn scale(full: &MempoolPolicy, m: usize) -> MempoolPolicy {
    let fm = full.capacity;
    let ratio = |v: usize| (v * m) / fm;
    let py1 = if full.future_quota == fm { m } else { ratio(full.future_quota).max(1) };
    let py2 = if full.sender_limit == fm { m } else { ratio(full.sender_limit).max(2).min(m) };
    let py3 = ratio(full.sender_limit_threshold);
    MempoolPolicy {
        capacity: m,
        future_quota: py1,
        sender_limit: py2,
        sender_limit_threshold: py3,
        ..full.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(name: &str) -> MempoolState {
        let p = policy_preset(name).unwrap();
        let w = WorldState::new(p.m());
        new_pool(p, w).unwrap()
    }

    #[test]
    fn presets_parse() {
        let g = policy_preset("geth-1.11").unwrap();
        assert_eq!(
            (g.capacity, g.future_quota, g.sender_limit, g.sender_limit_threshold),
            (6144, 1024, 16, 5120)
        );
        let r = policy_preset("geth-1.11-reduced(3,1,2,2)").unwrap();
        assert_eq!((r.capacity, r.future_quota, r.sender_limit, r.sender_limit_threshold), (3, 1, 2, 2));
        assert_eq!(policy_preset("reth-fifo").unwrap().eviction_rule, EvictionRule::None);
        assert_eq!(
            policy_preset("openethereum").unwrap().eviction_rule,
            EvictionRule::PriceChildlessOnly
        );
        assert!(policy_preset("geth-1.11").unwrap().replacement_overdraft_guard);
        assert!(policy_preset("parity").is_err());
        assert!(policy_preset("geth-1.11-reduced(3,4,2,2)").is_err());
        let s = policy_preset("geth-1.11-reduced(6)").unwrap();
        assert_eq!((s.future_quota, s.sender_limit, s.sender_limit_threshold), (1, 2, 5));
    }

    #[test]
    fn invalid_policy_rejected() {
        let mut p = policy_preset("geth-1.11-reduced(6)").unwrap();
        p.future_quota = 7;
        assert!(new_pool(p, WorldState::new(6)).is_err());
    }

    #[test]
    fn geth_legacy_admits_m_without_eviction() {
        let mut s = pool("geth-legacy");
        for _ in 0..s.capacity() {
            let tx = s.next_normal_tx(3);
            assert_eq!(s.admit(tx), AdmissionOutcome::AdmittedNoEvict);
        }
        assert_eq!(s.len(), 6144);
    }

    #[test]
    fn nethermind_reversible_pair() {
        let mut p = policy_preset("nethermind-legacy-reduced(2,2,2,2)").unwrap();
        p.name = "n".into();
        let a = Address::adversarial(1);
        let b = Address::adversarial(2);
        let tx1 = Transaction::new(a, 1, 1, 1);
        let tx2 = Transaction::new(b, 1, 1, 3);
        let tx3 = Transaction::new(a, 2, 1, 5);
        let mut s = new_pool(p.clone(), WorldState::new(2)).unwrap();
        s.admit(tx1);
        s.admit(tx2);
        let initial = s.txs();
        assert_eq!(s.admit(tx3), AdmissionOutcome::AdmittedEvicting(vec![tx2]));
        assert_eq!(s.admit(tx2), AdmissionOutcome::AdmittedEvicting(vec![tx3]));
        assert_eq!(s.txs(), initial);

        p.reversal_guard = true;
        let mut s = new_pool(p, WorldState::new(2)).unwrap();
        s.admit(tx1);
        s.admit(tx2);
        s.admit(tx3);
        assert_eq!(s.admit(tx2), AdmissionOutcome::Declined(DeclineReason::ReversalGuard));
    }

    #[test]
    fn fifo_full_declines() {
        let mut s = pool("reth-fifo-reduced(4)");
        s.fill_normal(4).unwrap();
        let tx = Transaction::new(Address::adversarial(1), 1, 1, 1000);
        assert_eq!(s.admit(tx), AdmissionOutcome::Declined(DeclineReason::FullNoVictim));
    }

    #[test]
    fn fill_normal_bounds() {
        let mut s = pool("geth-1.11-reduced(3,1,2,2)");
        s.fill_normal(0).unwrap();
        assert!(s.is_empty());
        assert!(s.fill_normal(4).is_err());
        s.fill_normal(3).unwrap();
        assert_eq!(s.len(), 3);
        let mut s = pool("geth-legacy-reduced(16)");
        s.fill_normal(16).unwrap();
        assert_eq!(crate::txmodel::total_fee(&s.txs()), 16 * 3 * 21000);
    }

    #[test]
    fn build_block_greedy() {
        let mut s = pool("geth-legacy-reduced(6)");
        s.fill_normal(3).unwrap();
        assert_eq!(s.build_block(3 * GAS).len(), 3);
        assert!(s.executable().is_empty());

        let mut s = pool("geth-legacy-reduced(6)");
        for (i, p) in [5, 3, 4].into_iter().enumerate() {
            s.admit(Transaction::new(Address::adversarial(i as u32 + 1), 1, 1, p));
        }
        let prices: Vec<u64> = s.build_block(2 * GAS).iter().map(|t| t.gas_price).collect();
        assert_eq!(prices, vec![5, 4]);

        let mut s = pool("geth-legacy-reduced(6)");
        s.admit(Transaction::new(Address::adversarial(1), 7, 1, 9));
        assert!(s.build_block(10 * GAS).is_empty());
    }

    #[test]
    fn replacement_guard_blocks_latent_turn() {
        let mut s = pool("geth-1.11-reduced(16,3,8,13)");
        let a = Address::adversarial(1);
        s.admit(Transaction::new(a, 1, 1, 4));
        s.admit(Transaction::new(a, 2, 2, 20));
        let r = Transaction::new(a, 1, 15, 5);
        assert_eq!(s.admit(r), AdmissionOutcome::Declined(DeclineReason::OverdraftGuard));
        let mut s = pool("geth-legacy-reduced(16,16,8,13)");
        s.admit(Transaction::new(a, 1, 1, 4));
        s.admit(Transaction::new(a, 2, 2, 20));
        assert!(s.admit(r).admitted());
    }

    #[test]
    fn canonical_json_roundtrip() {
        let mut s = pool("geth-legacy-reduced(6)");
        s.fill_normal(2).unwrap();
        s.admit(Transaction::new(Address::adversarial(1), 9, 1, 10));
        let j = s.to_json();
        let back: MempoolState = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), j);
    }
}
