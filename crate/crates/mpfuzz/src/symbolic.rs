//! The symbol abstraction over transactions and pool states.
//!
//! Concrete pools are collapsed into strings over `N E F P C O L R`; the
//! fuzzer explores those strings and re-instantiates symbols to concrete
//! transactions on demand.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mempool::{new_pool, AdmissionOutcome, MempoolError, MempoolPolicy, MempoolState};
use crate::txmodel::{classify, Address, Transaction, ValidityClass, WorldState};

/// Price of every normal (benign) transaction.
pub const NORMAL_PRICE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    N,
    E,
    F,
    P,
    C,
    O,
    L,
    R,
}

impl Symbol {
    pub const MUTATION_ORDER: [Symbol; 6] =
        [Symbol::P, Symbol::L, Symbol::C, Symbol::O, Symbol::R, Symbol::F];

    pub fn as_char(self) -> char {
        match self {
            Symbol::N => 'N',
            Symbol::E => 'E',
            Symbol::F => 'F',
            Symbol::P => 'P',
            Symbol::C => 'C',
            Symbol::O => 'O',
            Symbol::L => 'L',
            Symbol::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        Some(match c {
            'N' => Symbol::N,
            'E' => Symbol::E,
            'F' => Symbol::F,
            'P' => Symbol::P,
            'C' => Symbol::C,
            'O' => Symbol::O,
            'L' => Symbol::L,
            'R' => Symbol::R,
            _ => return None,
        })
    }

    /// Whether the symbol carries a sender-group variant.
    pub fn targets_group(self) -> bool {
        matches!(self, Symbol::C | Symbol::O | Symbol::L | Symbol::R)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("cannot parse symbol `{0}`")]
    Parse(String),
    #[error("symbol {0} is infeasible in this context")]
    Infeasible(SymbolizedTx),
    #[error(transparent)]
    Mempool(#[from] MempoolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolizedTx {
    pub symbol: Symbol,
    pub variant: Option<u32>,
}

impl SymbolizedTx {
    pub const fn new(symbol: Symbol, variant: Option<u32>) -> Self {
        SymbolizedTx { symbol, variant }
    }

    pub const fn bare(symbol: Symbol) -> Self {
        SymbolizedTx { symbol, variant: None }
    }
}

impl fmt::Display for SymbolizedTx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Some(v) => write!(f, "{}{}", self.symbol, v),
            None => write!(f, "{}", self.symbol),
        }
    }
}

impl FromStr for SymbolizedTx {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SymbolError::Parse(s.to_string());
        let mut chars = s.chars();
        let symbol = chars.next().and_then(Symbol::from_char).ok_or_else(err)?;
        let rest = chars.as_str();
        let variant = if rest.is_empty() { None } else { Some(rest.parse().map_err(|_| err())?) };
        Ok(SymbolizedTx { symbol, variant })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolizedInput(pub Vec<SymbolizedTx>);

impl SymbolizedInput {
    pub fn push(&mut self, s: SymbolizedTx) {
        self.0.push(s);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SymbolizedTx> {
        self.0.iter()
    }
}

impl fmt::Display for SymbolizedInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for SymbolizedInput {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace().map(str::parse).collect::<Result<Vec<_>, _>>().map(SymbolizedInput)
    }
}

/// A chain-connected adversarial sender as it appears in a symbolized state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub sender: Address,
    pub parent: Symbol,
    pub parent_price: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolizedState {
    pub symbols: Vec<Symbol>,
    /// Sender groups in state order; group `i` is addressed as variant `i + 1`.
    pub groups: Vec<Group>,
    pub m: u64,
}

impl SymbolizedState {
    pub fn key(&self) -> String {
        self.symbols.iter().map(|s| s.as_char()).collect()
    }

    pub fn count(&self, s: Symbol) -> usize {
        self.symbols.iter().filter(|&&x| x == s).count()
    }

    pub fn p_groups(&self) -> Vec<&Group> {
        self.groups.iter().filter(|g| g.parent == Symbol::P).collect()
    }
}

impl fmt::Display for SymbolizedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Symbol of a resident transaction, or of a prospective arrival.
pub fn symbolize_tx(tx: &Transaction, state: &MempoolState) -> Symbol {
    let m = state.policy.m();
    let acct = state.world.account(&tx.sender);
    if state.contains(tx) {
        if !state.is_connected(tx) {
            return Symbol::F;
        }
        if tx.sender.is_benign() {
            return Symbol::N;
        }
        if tx.nonce == acct.confirmed_nonce + 1 {
            return if tx.gas_price > m + 3 { Symbol::R } else { Symbol::P };
        }
        if tx.value > acct.balance {
            return Symbol::O;
        }
        let spent: u64 = state
            .sender_txs(&tx.sender)
            .iter()
            .filter(|t| t.nonce > acct.confirmed_nonce && t.nonce <= tx.nonce)
            .map(|t| t.value)
            .sum();
        return if spent > acct.balance { Symbol::L } else { Symbol::C };
    }
    match classify(tx, &state.world, &state.sender_txs(&tx.sender)) {
        ValidityClass::Replacement => Symbol::R,
        ValidityClass::Future => Symbol::F,
        ValidityClass::Overdraft => Symbol::O,
        ValidityClass::LatentOverdraft => Symbol::L,
        ValidityClass::Pending if tx.sender.is_benign() => Symbol::N,
        ValidityClass::Pending if tx.nonce == acct.confirmed_nonce + 1 => Symbol::P,
        ValidityClass::Pending => Symbol::C,
    }
}

/// Orders N first, then F, then sender groups by parent price (parent
/// followed by its children), then E padding.
pub fn symbolize_state(state: &MempoolState) -> SymbolizedState {
    let m = state.policy.m();
    let mut n = 0usize;
    let mut f = 0usize;
    let mut groups: Vec<(Group, Vec<Symbol>)> = Vec::new();
    for addr in state.senders() {
        let txs = state.sender_txs(addr);
        let mut syms = Vec::new();
        let mut parent = None;
        for tx in &txs {
            let s = symbolize_tx(tx, state);
            match s {
                Symbol::N => n += 1,
                Symbol::F => f += 1,
                Symbol::P | Symbol::R => {
                    parent = Some(Group { sender: *addr, parent: s, parent_price: tx.gas_price });
                    syms.insert(0, s);
                }
                _ => syms.push(s),
            }
        }
        if let Some(g) = parent {
            groups.push((g, syms));
        }
    }
    groups.sort_by_key(|(g, _)| (g.parent_price, g.sender));
    let mut symbols = vec![Symbol::N; n];
    symbols.extend(std::iter::repeat(Symbol::F).take(f));
    for (_, syms) in &groups {
        symbols.extend(syms);
    }
    let pad = state.capacity().saturating_sub(symbols.len());
    symbols.extend(std::iter::repeat(Symbol::E).take(pad));
    SymbolizedState { symbols, groups: groups.into_iter().map(|(g, _)| g).collect(), m }
}

/// Symbolic cost in price units: what the attacker would pay if the state
/// were mined as is.
pub fn cost(st: &SymbolizedState) -> u64 {
    weigh(st, st.m + 4, st.m + 4)
}

/// Optimistic cost: children and replaced parents are assumed turnable.
pub fn opcost(st: &SymbolizedState) -> u64 {
    weigh(st, 1, 0)
}

fn weigh(st: &SymbolizedState, c: u64, r: u64) -> u64 {
    let mut p_rank = 0;
    st.symbols
        .iter()
        .map(|s| match s {
            Symbol::N => NORMAL_PRICE,
            Symbol::P => {
                p_rank += 1;
                3 + p_rank
            }
            Symbol::C => c,
            Symbol::R => r,
            Symbol::F | Symbol::O | Symbol::L | Symbol::E => 0,
        })
        .sum()
}

/// Set of base symbols the mutator may append.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet(BTreeSet<Symbol>);

impl Alphabet {
    pub fn all() -> Self {
        Alphabet(Symbol::MUTATION_ORDER.into_iter().collect())
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.contains(&s)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::all()
    }
}

impl FromStr for Alphabet {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = BTreeSet::new();
        for c in s.chars().filter(|c| !c.is_whitespace() && *c != ',') {
            match Symbol::from_char(c) {
                Some(sym) if Symbol::MUTATION_ORDER.contains(&sym) => {
                    set.insert(sym);
                }
                _ => return Err(SymbolError::Parse(s.to_string())),
            }
        }
        Ok(Alphabet(set))
    }
}

impl TryFrom<String> for Alphabet {
    type Error = SymbolError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        Symbol::MUTATION_ORDER.iter().filter(|s| a.contains(**s)).map(|s| s.as_char()).collect()
    }
}

/// How a timeline starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Init {
    /// Pool filled with `m` normal transactions (eviction timelines).
    Normal,
    /// Empty pool (locking timelines).
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub sym: SymbolizedTx,
    pub tx: Transaction,
    pub outcome: AdmissionOutcome,
}

/// Concrete execution context for a symbolized input.
///
/// P prices are assigned by rank: `registry` lists every P sender in price
/// order and sender `i` pays `4 + i`. Inserting a P between two existing
/// ones shifts the later ones up by one, which keeps every relative price
/// comparison (and thus every admission decision) intact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymExec {
    pub state: MempoolState,
    pub init: Init,
    pub initial: Vec<Transaction>,
    pub registry: Vec<Address>,
    pub history: Vec<Step>,
    next_adv: u32,
}

impl SymExec {
    pub fn new(policy: MempoolPolicy, init: Init) -> Result<Self, SymbolError> {
        let m = policy.capacity;
        let world = WorldState::new(policy.m());
        let mut state = new_pool(policy, world)?;
        if init == Init::Normal {
            state.fill_normal(m)?;
        }
        let initial = state.txs();
        Ok(SymExec { state, init, initial, registry: Vec::new(), history: Vec::new(), next_adv: 1 })
    }

    /// Runs a whole input from a fresh pool; infeasible symbols abort.
    pub fn replay(
        policy: MempoolPolicy,
        init: Init,
        input: &SymbolizedInput,
    ) -> Result<Self, SymbolError> {
        let mut ex = SymExec::new(policy, init)?;
        for s in input.iter() {
            ex.apply(*s)?;
        }
        Ok(ex)
    }

    pub fn m(&self) -> u64 {
        self.state.policy.m()
    }

    pub fn symbolized(&self) -> SymbolizedState {
        symbolize_state(&self.state)
    }

    /// Adversarial transactions in submission order.
    pub fn concrete_txs(&self) -> Vec<Transaction> {
        self.history.iter().map(|s| s.tx).collect()
    }

    pub fn input(&self) -> SymbolizedInput {
        SymbolizedInput(self.history.iter().map(|s| s.sym).collect())
    }

    fn fresh_adversary(&mut self) -> Address {
        let a = Address::adversarial(self.next_adv);
        self.next_adv += 1;
        a
    }

    fn group(&self, st: &SymbolizedState, sym: SymbolizedTx) -> Result<Group, SymbolError> {
        let idx = sym.variant.ok_or(SymbolError::Infeasible(sym))? as usize;
        if idx == 0 {
            return Err(SymbolError::Infeasible(sym));
        }
        st.groups.get(idx - 1).copied().ok_or(SymbolError::Infeasible(sym))
    }

    /// Registry slot for a P with the given variant.
    fn p_position(&self, st: &SymbolizedState, sym: SymbolizedTx) -> Result<usize, SymbolError> {
        if self.registry.len() >= self.m() as usize {
            return Err(SymbolError::Infeasible(sym));
        }
        let pg = st.p_groups();
        let pos_of = |a: &Address| self.registry.iter().position(|r| r == a);
        let j = sym.variant.map(|v| v as usize).unwrap_or(pg.len());
        if j > pg.len() || (sym.variant.is_none() && !pg.is_empty()) {
            return Err(SymbolError::Infeasible(sym));
        }
        if j < pg.len() {
            return pos_of(&pg[j].sender).ok_or(SymbolError::Infeasible(sym));
        }
        match pg.last() {
            Some(g) => pos_of(&g.sender).map(|p| p + 1).ok_or(SymbolError::Infeasible(sym)),
            None => Ok(self.registry.len()),
        }
    }

    /// The transaction a group-targeting symbol would send, without sending it.
    fn group_tx(&self, st: &SymbolizedState, sym: SymbolizedTx) -> Result<Transaction, SymbolError> {
        let m = self.m();
        let g = self.group(st, sym)?;
        let acct = self.state.world.account(&g.sender);
        let top = acct.confirmed_nonce + self.state.chain_count(&g.sender) as u64;
        let (nonce, value, want) = match sym.symbol {
            Symbol::C => (top + 1, 1, Some(ValidityClass::Pending)),
            Symbol::O => (top + 1, m + 1, None),
            Symbol::L => (top + 1, m - 1, Some(ValidityClass::LatentOverdraft)),
            Symbol::R => {
                if g.parent != Symbol::P {
                    return Err(SymbolError::Infeasible(sym));
                }
                (acct.confirmed_nonce + 1, m - 1, None)
            }
            _ => unreachable!("not a group symbol"),
        };
        let tx = Transaction::new(g.sender, nonce, value, m + 4);
        if let Some(want) = want {
            let class = classify(&tx, &self.state.world, &self.state.sender_txs(&g.sender));
            if class != want {
                return Err(SymbolError::Infeasible(sym));
            }
        }
        Ok(tx)
    }

    /// Whether `sym` can be instantiated in the current context.
    pub fn feasible(&self, st: &SymbolizedState, sym: SymbolizedTx) -> bool {
        match sym.symbol {
            Symbol::N => true,
            Symbol::E => false,
            Symbol::F => self.state.future_count() < self.state.policy.future_quota,
            Symbol::P => self.p_position(st, sym).is_ok(),
            _ => self.group_tx(st, sym).is_ok(),
        }
    }

    /// Instantiates `sym` and admits it.
    pub fn apply(&mut self, sym: SymbolizedTx) -> Result<AdmissionOutcome, SymbolError> {
        let m = self.m();
        let st = self.symbolized();
        let tx = match sym.symbol {
            Symbol::E => return Err(SymbolError::Infeasible(sym)),
            Symbol::N => self.state.next_normal_tx(NORMAL_PRICE),
            Symbol::F => {
                if !self.feasible(&st, sym) {
                    return Err(SymbolError::Infeasible(sym));
                }
                let a = self.fresh_adversary();
                Transaction::new(a, m + 1, 1, m + 4)
            }
            Symbol::P => {
                let pos = self.p_position(&st, sym)?;
                let a = self.fresh_adversary();
                self.registry.insert(pos, a);
                for i in pos + 1..self.registry.len() {
                    self.reprice(self.registry[i], 4 + i as u64 - 1, 4 + i as u64);
                }
                Transaction::new(a, 1, 1, 4 + pos as u64)
            }
            _ => self.group_tx(&st, sym)?,
        };
        let outcome = self.state.admit(tx);
        self.history.push(Step { sym, tx, outcome: outcome.clone() });
        Ok(outcome)
    }

    fn reprice(&mut self, sender: Address, old: u64, new: u64) {
        for step in &mut self.history {
            if step.sym.symbol == Symbol::P && step.tx.sender == sender {
                step.tx.gas_price = new;
            }
            if let AdmissionOutcome::AdmittedEvicting(v) = &mut step.outcome {
                for t in v.iter_mut() {
                    if t.sender == sender && t.nonce == 1 && t.gas_price == old {
                        t.gas_price = new;
                    }
                }
            }
        }
        self.state.reprice(&sender, 1, old, new);
    }

    /// Feasible mutations in the fixed order P, L, C, O, R, F with variants
    /// ascending, restricted to `alphabet`.
    pub fn enumerate_mutations(&self, alphabet: &Alphabet) -> Vec<SymbolizedTx> {
        let st = self.symbolized();
        let mut out = Vec::new();
        for base in Symbol::MUTATION_ORDER {
            if !alphabet.contains(base) {
                continue;
            }
            let variants: Vec<SymbolizedTx> = match base {
                Symbol::P => {
                    let n = st.p_groups().len();
                    if n == 0 {
                        vec![SymbolizedTx::bare(Symbol::P)]
                    } else {
                        (0..=n as u32).map(|j| SymbolizedTx::new(Symbol::P, Some(j))).collect()
                    }
                }
                Symbol::F => vec![SymbolizedTx::bare(Symbol::F)],
                _ => (1..=st.groups.len() as u32)
                    .map(|i| SymbolizedTx::new(base, Some(i)))
                    .collect(),
            };
            out.extend(variants.into_iter().filter(|s| self.feasible(&st, *s)));
        }
        out
    }
}

pub fn enumerate_mutations(ctx: &SymExec, alphabet: &Alphabet) -> Vec<SymbolizedTx> {
    ctx.enumerate_mutations(alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mempool::policy_preset;

    fn case_study() -> SymExec {
        SymExec::new(policy_preset("geth-1.11-reduced(3,1,2,2)").unwrap(), Init::Normal).unwrap()
    }

    fn pco() -> Alphabet {
        "PCO".parse().unwrap()
    }

    fn run(input: &str) -> SymExec {
        SymExec::replay(
            policy_preset("geth-1.11-reduced(3,1,2,2)").unwrap(),
            Init::Normal,
            &input.parse().unwrap(),
        )
        .unwrap()
    }

    fn muts(ex: &SymExec) -> String {
        SymbolizedInput(ex.enumerate_mutations(&pco())).to_string()
    }

    #[test]
    fn parse_roundtrip() {
        let s: SymbolizedInput = "P C1 P0 C1 C1".parse().unwrap();
        assert_eq!(s.to_string(), "P C1 P0 C1 C1");
        assert!("X1".parse::<SymbolizedTx>().is_err());
        assert_eq!(String::from("LCP".parse::<Alphabet>().unwrap()), "PLC");
    }

    #[test]
    fn case_study_states() {
        let ex = case_study();
        assert_eq!(ex.symbolized().key(), "NNN");
        assert_eq!(muts(&ex), "P");
        assert_eq!(run("P").symbolized().key(), "NNP");
        assert_eq!(muts(&run("P")), "P0 P1 C1 O1");
        assert_eq!(run("P P0").symbolized().key(), "NPP");
        assert_eq!(run("P P1").symbolized().key(), "NPP");
        assert_eq!(run("P C1").symbolized().key(), "NPC");
        assert_eq!(run("P C1 P0").symbolized().key(), "PPC");
        assert_eq!(run("P C1 P1").symbolized().key(), "PCP");
        assert_eq!(muts(&run("P C1 P0")).split(' ').count(), 7);
        assert_eq!(run("P C1 P0 C1").symbolized().key(), "FPC");
        assert_eq!(run("P C1 P0 C1 P1").symbolized().key(), "FPE");
        assert_eq!(run("P C1 P0 C1 C1").symbolized().key(), "FEE");
    }

    #[test]
    fn declines_in_trace() {
        let mut ex = run("P");
        assert!(!ex.apply("O1".parse().unwrap()).unwrap().admitted());
        let mut ex = run("P C1");
        assert!(!ex.apply("C1".parse().unwrap()).unwrap().admitted());
        let mut ex = run("P C1 P0 C1");
        assert!(!ex.apply("P0".parse().unwrap()).unwrap().admitted());
    }

    #[test]
    fn rank_prices() {
        let ex = run("P P0");
        let mut prices: Vec<u64> = ex.concrete_txs().iter().map(|t| t.gas_price).collect();
        prices.sort();
        assert_eq!(prices, vec![4, 5]);
        // the later P was ranked below, so the first one moved up
        assert_eq!(ex.concrete_txs()[0].gas_price, 5);
        let ex = run("P P1");
        assert_eq!(ex.concrete_txs()[1].gas_price, 5);
    }

    #[test]
    fn opcost_vectors() {
        let o = |s: &str| opcost(&run(s).symbolized());
        assert_eq!(opcost(&case_study().symbolized()), 9);
        assert_eq!(o("P"), 10);
        assert_eq!(o("P C1"), 8);
        assert_eq!(o("P P0"), 12);
        assert_eq!(o("P C1 P0"), 10);
        assert_eq!(o("P C1 P1"), 10);
        assert_eq!(o("P C1 P0 C1 C1"), 0);
        assert_eq!(cost(&run("P C1").symbolized()), 3 + 4 + 7);
    }

    #[test]
    fn fpcp_example() {
        let p = MempoolPolicy { capacity: 4, ..policy_preset("geth-legacy-reduced(4)").unwrap() };
        let mut s = new_pool(p, WorldState::new(4)).unwrap();
        let a1 = Address::adversarial(1);
        let a2 = Address::adversarial(2);
        s.admit(Transaction::new(a1, 1, 1, 4));
        s.admit(Transaction::new(Address::benign(1), 100, 1, 100));
        s.admit(Transaction::new(a2, 1, 1, 5));
        s.admit(Transaction::new(a1, 2, 1, 10001));
        assert_eq!(symbolize_state(&s).key(), "FPCP");
        assert_eq!(symbolize_tx(&Transaction::new(a1, 1, 1, 4), &s), Symbol::P);
        assert_eq!(symbolize_tx(&Transaction::new(a1, 2, 1, 10001), &s), Symbol::C);
    }

    #[test]
    fn instantiation_shapes() {
        let p = policy_preset("geth-legacy-reduced(16)").unwrap();
        let mut ex = SymExec::new(p, Init::Empty).unwrap();
        assert_eq!(ex.symbolized().key(), "E".repeat(16));
        ex.apply(SymbolizedTx::bare(Symbol::F)).unwrap();
        let f = ex.concrete_txs()[0];
        assert_eq!((f.nonce, f.gas_price), (17, 20));
        ex.apply(SymbolizedTx::bare(Symbol::P)).unwrap();
        ex.apply("R1".parse().unwrap()).unwrap();
        let r = ex.concrete_txs()[2];
        assert_eq!((r.sender, r.nonce, r.value, r.gas_price), (ex.concrete_txs()[1].sender, 1, 15, 20));
        assert_eq!(ex.symbolized().key()[..2].to_string(), "FR");
    }

    #[test]
    fn future_quota_excludes_f() {
        let p = policy_preset("geth-1.11-reduced(6)").unwrap();
        let mut ex = SymExec::new(p, Init::Empty).unwrap();
        ex.apply(SymbolizedTx::bare(Symbol::F)).unwrap();
        let all = ex.enumerate_mutations(&Alphabet::all());
        assert!(all.iter().all(|s| s.symbol != Symbol::F));
    }
}
