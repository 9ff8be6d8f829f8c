//! LR(1) stategraph and statetable construction.
//!
//! States are built from canonical LR(1) item sets. With merging enabled, a new state is
//! folded into an existing state with the same core whenever Pager's weak compatibility
//! test allows it. Pager's merging can over-merge when precedence declarations are used to
//! resolve conflicts; that is accepted here.
//!
//! The grammar is augmented with a production `^: Start $`. The state reached by shifting
//! `$` in it is never entered while parsing (the table accepts instead) but it is kept in the
//! graph, so state numbers follow the usual textbook layout.
//!
//! After construction, unreachable states are dropped and the remainder renumbered
//! breadth-first from state 0, visiting a state's rule edges (in rule order) before its token
//! edges (in token order).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write};

use crate::grammar::{Assoc, Grammar, ProdId, RuleId, Symbol, TokenId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A small dense bitset over token ordinals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSet {
    words: Vec<u64>,
}

impl TokenSet {
    pub fn new(n: usize) -> Self {
        TokenSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn insert(&mut self, t: TokenId) -> bool {
        let (w, b) = (t.index() / 64, t.index() % 64);
        let old = self.words[w];
        self.words[w] |= 1 << b;
        old != self.words[w]
    }

    pub fn contains(&self, t: TokenId) -> bool {
        self.words[t.index() / 64] & (1 << (t.index() % 64)) != 0
    }

    /// Returns true if `self` changed.
    pub fn union_with(&mut self, other: &TokenSet) -> bool {
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let n = *a | *b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    pub fn intersects(&self, other: &TokenSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, w)| {
            (0..64)
                .filter(move |b| w & (1u64 << b) != 0)
                .map(move |b| TokenId((i * 64 + b) as u32))
        })
    }
}

/// Productions as seen by the table builder: the grammar's own, plus the augmented start
/// production at index `grm.prods_len()`.
struct Prods {
    syms: Vec<Vec<Symbol>>,
    rule_prods: Vec<Vec<u32>>,
    aug: u32,
}

impl Prods {
    fn new(grm: &Grammar) -> Self {
        let mut syms: Vec<Vec<Symbol>> = grm
            .prod_ids()
            .map(|p| grm.prod(p).symbols.clone())
            .collect();
        let aug = syms.len() as u32;
        syms.push(vec![
            Symbol::Rule(grm.start_rule()),
            Symbol::Token(grm.eof()),
        ]);
        let rule_prods = grm
            .rule_ids()
            .map(|r| grm.rule(r).prods.iter().map(|p| p.0).collect())
            .collect();
        Prods {
            syms,
            rule_prods,
            aug,
        }
    }
}

struct Firsts {
    firsts: Vec<TokenSet>,
    nullable: Vec<bool>,
}

impl Firsts {
    fn new(grm: &Grammar) -> Self {
        let mut firsts = vec![TokenSet::new(grm.tokens_len()); grm.rules_len()];
        let mut nullable = vec![false; grm.rules_len()];
        loop {
            let mut changed = false;
            for p in grm.prod_ids() {
                let prod = grm.prod(p);
                let r = prod.rule.index();
                let mut all_nullable = true;
                for s in &prod.symbols {
                    match s {
                        Symbol::Token(t) => {
                            changed |= firsts[r].insert(*t);
                            all_nullable = false;
                        }
                        Symbol::Rule(q) => {
                            if q.index() != r {
                                let f = firsts[q.index()].clone();
                                changed |= firsts[r].union_with(&f);
                            }
                            if !nullable[q.index()] {
                                all_nullable = false;
                            }
                        }
                    }
                    if !all_nullable {
                        break;
                    }
                }
                if all_nullable && !nullable[r] {
                    nullable[r] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Firsts { firsts, nullable }
    }

    /// FIRST(syms) into `out`; returns true if `syms` is nullable.
    fn first_of(&self, syms: &[Symbol], out: &mut TokenSet) -> bool {
        for s in syms {
            match s {
                Symbol::Token(t) => {
                    out.insert(*t);
                    return false;
                }
                Symbol::Rule(r) => {
                    out.union_with(&self.firsts[r.index()]);
                    if !self.nullable[r.index()] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// An LR(1) item: a production, a dot position and a lookahead set. `prod` equal to the
/// grammar's production count denotes the augmented start production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub prod: u32,
    pub dot: u32,
    pub lookahead: TokenSet,
}

#[derive(Clone, Debug)]
struct Kernel {
    core: Vec<(u32, u32)>,
    las: Vec<TokenSet>,
}

/// The LR(1) automaton.
#[derive(Clone, Debug)]
pub struct StateGraph {
    /// Kernel items of each state.
    kernels: Vec<Vec<Item>>,
    edges: Vec<BTreeMap<Symbol, StateId>>,
    aug_prod: u32,
}

impl StateGraph {
    pub fn states_len(&self) -> usize {
        self.kernels.len()
    }

    pub fn edge(&self, s: StateId, sym: Symbol) -> Option<StateId> {
        self.edges[s.index()].get(&sym).copied()
    }

    pub fn edges(&self, s: StateId) -> impl Iterator<Item = (Symbol, StateId)> + '_ {
        self.edges[s.index()].iter().map(|(k, v)| (*k, *v))
    }

    pub fn kernel(&self, s: StateId) -> &[Item] {
        &self.kernels[s.index()]
    }

    /// The full item set (kernel plus closure) of a state.
    pub fn closed_items(&self, grm: &Grammar, s: StateId) -> Vec<Item> {
        let prods = Prods::new(grm);
        let firsts = Firsts::new(grm);
        let k = &self.kernels[s.index()];
        let kernel = Kernel {
            core: k.iter().map(|i| (i.prod, i.dot)).collect(),
            las: k.iter().map(|i| i.lookahead.clone()).collect(),
        };
        closure(&prods, &firsts, grm.tokens_len(), &kernel)
            .into_iter()
            .map(|(prod, dot, lookahead)| Item {
                prod,
                dot,
                lookahead,
            })
            .collect()
    }

    /// A textual dump of states, items and edges.
    pub fn pp(&self, grm: &Grammar) -> String {
        let prods = Prods::new(grm);
        let mut out = String::new();
        for s in 0..self.states_len() {
            let sid = StateId(s as u32);
            writeln!(out, "state {}:", s).unwrap();
            for it in self.closed_items(grm, sid) {
                let lhs = if it.prod == prods.aug {
                    "^".to_owned()
                } else {
                    grm.rule_name(grm.prod(ProdId(it.prod)).rule).to_owned()
                };
                let mut rhs = String::new();
                for (i, sym) in prods.syms[it.prod as usize].iter().enumerate() {
                    if i as u32 == it.dot {
                        rhs.push_str(" .");
                    }
                    write!(rhs, " {}", grm.symbol_name(*sym)).unwrap();
                }
                if it.dot as usize == prods.syms[it.prod as usize].len() {
                    rhs.push_str(" .");
                }
                let la: Vec<&str> = it.lookahead.iter().map(|t| grm.token_name(t)).collect();
                writeln!(out, "  [{}:{} {{{}}}]", lhs, rhs, la.join(", ")).unwrap();
            }
            for (sym, to) in self.edges(sid) {
                writeln!(out, "  {} -> {}", grm.symbol_name(sym), to).unwrap();
            }
        }
        out
    }

    pub fn is_augmented_prod(&self, prod: u32) -> bool {
        prod == self.aug_prod
    }
}

fn closure(prods: &Prods, firsts: &Firsts, ntoks: usize, k: &Kernel) -> Vec<(u32, u32, TokenSet)> {
    let mut items: Vec<(u32, u32, TokenSet)> = k
        .core
        .iter()
        .zip(&k.las)
        .map(|(&(p, d), la)| (p, d, la.clone()))
        .collect();
    let mut index: HashMap<(u32, u32), usize> = items
        .iter()
        .enumerate()
        .map(|(i, (p, d, _))| ((*p, *d), i))
        .collect();
    let mut todo: VecDeque<usize> = (0..items.len()).collect();
    let mut queued = vec![true; items.len()];
    while let Some(i) = todo.pop_front() {
        queued[i] = false;
        let (p, d) = (items[i].0, items[i].1);
        let syms = &prods.syms[p as usize];
        let r = match syms.get(d as usize) {
            Some(Symbol::Rule(r)) => *r,
            _ => continue,
        };
        let mut la = TokenSet::new(ntoks);
        if firsts.first_of(&syms[d as usize + 1..], &mut la) {
            la.union_with(&items[i].2);
        }
        for &q in &prods.rule_prods[r.index()] {
            match index.get(&(q, 0)) {
                Some(&j) => {
                    if items[j].2.union_with(&la) && !queued[j] {
                        queued[j] = true;
                        todo.push_back(j);
                    }
                }
                None => {
                    let j = items.len();
                    items.push((q, 0, la.clone()));
                    index.insert((q, 0), j);
                    queued.push(true);
                    todo.push_back(j);
                }
            }
        }
    }
    items
}

/// Successor kernels of a closed item set, keyed by the symbol after the dot.
fn gotos(prods: &Prods, items: &[(u32, u32, TokenSet)]) -> BTreeMap<Symbol, Kernel> {
    let mut out: BTreeMap<Symbol, Vec<(u32, u32, TokenSet)>> = BTreeMap::new();
    for (p, d, la) in items {
        if let Some(sym) = prods.syms[*p as usize].get(*d as usize) {
            out.entry(*sym).or_default().push((*p, *d + 1, la.clone()));
        }
    }
    out.into_iter()
        .map(|(sym, mut its)| {
            its.sort_by_key(|(p, d, _)| (*p, *d));
            let kernel = Kernel {
                core: its.iter().map(|(p, d, _)| (*p, *d)).collect(),
                las: its.into_iter().map(|(_, _, la)| la).collect(),
            };
            (sym, kernel)
        })
        .collect()
}

/// Pager's weak compatibility test for two lookahead vectors over the same core.
fn weakly_compatible(a: &[TokenSet], b: &[TokenSet]) -> bool {
    let n = a.len();
    for i in 0..n {
        for j in i + 1..n {
            let cross = a[i].intersects(&b[j]) || b[i].intersects(&a[j]);
            if cross && !a[i].intersects(&a[j]) && !b[i].intersects(&b[j]) {
                return false;
            }
        }
    }
    true
}

/// Builds the LR(1) stategraph. With `merge` false, the canonical LR(1) graph is built.
pub fn build_stategraph(grm: &Grammar, merge: bool) -> StateGraph {
    let prods = Prods::new(grm);
    let firsts = Firsts::new(grm);
    let ntoks = grm.tokens_len();

    let mut start_la = TokenSet::new(ntoks);
    start_la.insert(grm.eof());
    let mut states: Vec<Kernel> = vec![Kernel {
        core: vec![(prods.aug, 0)],
        las: vec![start_la],
    }];
    let mut by_core: HashMap<Vec<(u32, u32)>, Vec<usize>> = HashMap::new();
    by_core.insert(states[0].core.clone(), vec![0]);
    let mut edges: Vec<BTreeMap<Symbol, usize>> = vec![BTreeMap::new()];
    let mut todo: VecDeque<usize> = VecDeque::from([0]);
    let mut queued = vec![true];

    while let Some(i) = todo.pop_front() {
        queued[i] = false;
        let items = closure(&prods, &firsts, ntoks, &states[i]);
        let mut new_edges = BTreeMap::new();
        for (sym, k) in gotos(&prods, &items) {
            let cands = by_core.entry(k.core.clone()).or_default();
            let found = cands.iter().copied().find(|&c| {
                if merge {
                    weakly_compatible(&states[c].las, &k.las)
                } else {
                    states[c].las == k.las
                }
            });
            let target = match found {
                Some(c) => {
                    let mut changed = false;
                    for (a, b) in states[c].las.iter_mut().zip(&k.las) {
                        changed |= a.union_with(b);
                    }
                    if changed && !queued[c] {
                        queued[c] = true;
                        todo.push_back(c);
                    }
                    c
                }
                None => {
                    let c = states.len();
                    cands.push(c);
                    states.push(k);
                    edges.push(BTreeMap::new());
                    queued.push(true);
                    todo.push_back(c);
                    c
                }
            };
            new_edges.insert(sym, target);
        }
        edges[i] = new_edges;
    }

    // Drop unreachable states (lookahead growth can redirect edges) and renumber
    // breadth-first.
    let mut renum: Vec<Option<u32>> = vec![None; states.len()];
    let mut order = vec![0usize];
    renum[0] = Some(0);
    let mut q = 0;
    while q < order.len() {
        let s = order[q];
        q += 1;
        for &t in edges[s].values() {
            if renum[t].is_none() {
                renum[t] = Some(order.len() as u32);
                order.push(t);
            }
        }
    }
    let kernels = order
        .iter()
        .map(|&s| {
            let k = &states[s];
            k.core
                .iter()
                .zip(&k.las)
                .map(|(&(prod, dot), la)| Item {
                    prod,
                    dot,
                    lookahead: la.clone(),
                })
                .collect()
        })
        .collect();
    let new_edges = order
        .iter()
        .map(|&s| {
            edges[s]
                .iter()
                .map(|(sym, t)| (*sym, StateId(renum[*t].unwrap())))
                .collect()
        })
        .collect();
    StateGraph {
        kernels,
        edges: new_edges,
        aug_prod: prods.aug,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Shift(StateId),
    Reduce(ProdId),
    Accept,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conflict {
    /// Resolved in favour of the shift.
    ShiftReduce {
        state: StateId,
        token: TokenId,
        prod: ProdId,
    },
    /// Resolved in favour of `kept`, the earlier production.
    ReduceReduce {
        state: StateId,
        token: TokenId,
        kept: ProdId,
        dropped: ProdId,
    },
}

/// Row-per-state action and goto tables.
#[derive(Clone, Debug)]
pub struct StateTable {
    ntoks: usize,
    nrules: usize,
    actions: Vec<Action>,
    gotos: Vec<Option<StateId>>,
    prod_lens: Vec<u32>,
    prod_rules: Vec<RuleId>,
    eof: TokenId,
    /// Conflicts that were not resolved by precedence declarations.
    pub conflicts: Vec<Conflict>,
}

impl StateTable {
    pub fn action(&self, s: StateId, t: TokenId) -> Action {
        self.actions[s.index() * self.ntoks + t.index()]
    }

    pub fn goto(&self, s: StateId, r: RuleId) -> Option<StateId> {
        self.gotos[s.index() * self.nrules + r.index()]
    }

    pub fn states_len(&self) -> usize {
        self.actions.len() / self.ntoks
    }

    pub fn tokens_len(&self) -> usize {
        self.ntoks
    }

    pub fn eof(&self) -> TokenId {
        self.eof
    }

    pub fn prod_len(&self, p: ProdId) -> usize {
        self.prod_lens[p.index()] as usize
    }

    pub fn prod_rule(&self, p: ProdId) -> RuleId {
        self.prod_rules[p.index()]
    }

    /// Tokens with a non-error action in state `s`, in token order.
    pub fn state_actions(&self, s: StateId) -> impl Iterator<Item = TokenId> + '_ {
        let row = &self.actions[s.index() * self.ntoks..(s.index() + 1) * self.ntoks];
        row.iter()
            .enumerate()
            .filter(|(_, a)| **a != Action::Error)
            .map(|(i, _)| TokenId(i as u32))
    }
}

/// Builds the statetable, resolving shift/reduce conflicts by precedence (else shift) and
/// reduce/reduce conflicts in favour of the earlier production.
pub fn build_statetable(sg: &StateGraph, grm: &Grammar) -> StateTable {
    let ntoks = grm.tokens_len();
    let nrules = grm.rules_len();
    let nstates = sg.states_len();
    let mut actions = vec![Action::Error; nstates * ntoks];
    let mut gotos = vec![None; nstates * nrules];
    let mut conflicts = Vec::new();
    let eof = grm.eof();

    for s in 0..nstates {
        let sid = StateId(s as u32);
        for (sym, to) in sg.edges(sid) {
            match sym {
                Symbol::Rule(r) => gotos[s * nrules + r.index()] = Some(to),
                Symbol::Token(t) if t == eof => actions[s * ntoks + t.index()] = Action::Accept,
                Symbol::Token(t) => actions[s * ntoks + t.index()] = Action::Shift(to),
            }
        }
        // Reductions, earliest production first so that reduce/reduce conflicts keep it.
        let mut reduces: Vec<(u32, TokenSet)> = sg
            .closed_items(grm, sid)
            .into_iter()
            .filter(|it| {
                !sg.is_augmented_prod(it.prod)
                    && it.dot as usize == grm.prod(ProdId(it.prod)).symbols.len()
            })
            .map(|it| (it.prod, it.lookahead))
            .collect();
        reduces.sort_by_key(|(p, _)| *p);
        for (p, la) in reduces {
            let pid = ProdId(p);
            for t in la.iter() {
                let cell = &mut actions[s * ntoks + t.index()];
                match *cell {
                    Action::Error => *cell = Action::Reduce(pid),
                    Action::Reduce(kept) => conflicts.push(Conflict::ReduceReduce {
                        state: sid,
                        token: t,
                        kept,
                        dropped: pid,
                    }),
                    Action::Shift(_) => match (grm.prod_precedence(pid), grm.token_precedence(t)) {
                        (Some(pp), Some(tp)) => {
                            if pp.level > tp.level {
                                *cell = Action::Reduce(pid);
                            } else if pp.level == tp.level {
                                match tp.assoc {
                                    Assoc::Left => *cell = Action::Reduce(pid),
                                    Assoc::Right => (),
                                    Assoc::NonAssoc => *cell = Action::Error,
                                }
                            }
                        }
                        _ => conflicts.push(Conflict::ShiftReduce {
                            state: sid,
                            token: t,
                            prod: pid,
                        }),
                    },
                    Action::Accept => unreachable!("accept only appears on the EOF column"),
                }
            }
        }
    }

    StateTable {
        ntoks,
        nrules,
        actions,
        gotos,
        prod_lens: grm
            .prod_ids()
            .map(|p| grm.prod(p).symbols.len() as u32)
            .collect(),
        prod_rules: grm.prod_ids().map(|p| grm.prod(p).rule).collect(),
        eof,
        conflicts,
    }
}
