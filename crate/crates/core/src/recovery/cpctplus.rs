//! Minimum cost repair search.
//!
//! The search is uniform cost over configurations (parse stack, input offset, repairs) with a
//! queue holding one bucket per cost. Neighbours come from inserting any token the current
//! state can shift (never EOF, and never straight after a delete), deleting the next token,
//! and shifting it. Once a successful configuration of cost `c` is found, every other
//! configuration of cost `c` is explored too, so the complete set of minimum cost sequences
//! is found. A configuration is successful when its last `n_shifts` repairs are shifts or the
//! parser would accept.
//!
//! Configurations with the same stack and offset, and repair sequences that end in the same
//! number of shifts (and agree on ending in a delete when that number is zero), are merged
//! while they wait in the queue. A merged configuration keeps every repair sequence that led
//! to it.
//!
//! Successful configurations are then ranked by how far parsing gets after them, and only the
//! best survive.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::time::Instant;

use thiserror::Error;

use crate::cactus::{Bump, Cactus};
use crate::grammar::{ProdId, TokenId};
use crate::lexer::Token;
use crate::lrtable::{Action, StateId, StateTable};
use crate::recovery::{prune_trailing_shifts, RecoveryParams, Repair, ShiftRule};

/// A node in a configuration's repair history. `Merge` carries the repair of this node plus
/// the complete histories of configurations merged into it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RepairMerge<'a> {
    Repair(Repair),
    Merge(Repair, Cactus<'a, Cactus<'a, RepairMerge<'a>>>),
    Terminator,
}

impl RepairMerge<'_> {
    pub fn repair(&self) -> Option<Repair> {
        match self {
            RepairMerge::Repair(r) | RepairMerge::Merge(r, _) => Some(*r),
            RepairMerge::Terminator => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Configuration<'a> {
    pub stack: Cactus<'a, StateId>,
    pub offset: usize,
    pub repairs: Cactus<'a, RepairMerge<'a>>,
    pub cost: u32,
}

impl Configuration<'_> {
    fn last_repair(&self) -> Option<Repair> {
        self.repairs.val().and_then(RepairMerge::repair)
    }

    fn trailing_shifts(&self, max: usize) -> usize {
        self.repairs
            .vals()
            .take(max)
            .take_while(|r| r.repair() == Some(Repair::Shift))
            .count()
    }

    fn key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.stack.hash(&mut h);
        self.offset.hash(&mut h);
        h.finish()
    }

    fn compatible(&self, other: &Configuration) -> bool {
        if self.offset != other.offset || self.stack != other.stack {
            return false;
        }
        let n = self.trailing_shifts(usize::MAX);
        if n != other.trailing_shifts(usize::MAX) {
            return false;
        }
        n > 0
            || (self.last_repair() == Some(Repair::Delete))
                == (other.last_repair() == Some(Repair::Delete))
    }

    /// Every repair sequence this configuration stands for, trailing shifts included.
    pub fn sequences(&self) -> Vec<Vec<Repair>> {
        traverse(&self.repairs)
    }
}

fn traverse(rm: &Cactus<RepairMerge>) -> Vec<Vec<Repair>> {
    let (r, merged) = match rm.val() {
        None | Some(RepairMerge::Terminator) => return vec![vec![]],
        Some(RepairMerge::Repair(r)) => (*r, None),
        Some(RepairMerge::Merge(r, ms)) => (*r, Some(ms)),
    };
    let mut out = traverse(&rm.parent().unwrap());
    for s in &mut out {
        s.push(r);
    }
    if let Some(ms) = merged {
        for m in ms.vals() {
            out.extend(traverse(m));
        }
    }
    out
}

/// Configurations of one cost. With merging on, `heads` maps a configuration key to the most
/// recently pushed configuration with that key, and `prev` chains back to earlier ones. Since
/// pops only take the last configuration, it is always the head of its chain.
#[derive(Default)]
struct Bucket<'a> {
    cfgs: Vec<Configuration<'a>>,
    prev: Vec<Option<usize>>,
    heads: HashMap<u64, usize>,
}

/// One bucket per cost. Within a bucket configurations are popped last-in first-out.
struct TodoQueue<'a> {
    buckets: Vec<Bucket<'a>>,
    merge: bool,
    arena: &'a Bump,
}

impl<'a> TodoQueue<'a> {
    fn push(&mut self, cfg: Configuration<'a>) {
        let c = cfg.cost as usize;
        if self.buckets.len() <= c {
            self.buckets.resize_with(c + 1, Bucket::default);
        }
        let b = &mut self.buckets[c];
        if !self.merge {
            b.cfgs.push(cfg);
            return;
        }
        let key = cfg.key();
        let head = b.heads.get(&key).copied();
        let mut i = head;
        while let Some(j) = i {
            if b.cfgs[j].compatible(&cfg) {
                merge_into(self.arena, &mut b.cfgs[j], cfg);
                return;
            }
            i = b.prev[j];
        }
        b.heads.insert(key, b.cfgs.len());
        b.prev.push(head);
        b.cfgs.push(cfg);
    }

    fn pop(&mut self, c: usize) -> Option<Configuration<'a>> {
        let b = self.buckets.get_mut(c)?;
        let cfg = b.cfgs.pop()?;
        if self.merge {
            let key = cfg.key();
            match b.prev.pop().unwrap() {
                Some(p) => b.heads.insert(key, p),
                None => b.heads.remove(&key),
            };
        }
        Some(cfg)
    }
}

fn merge_into<'a>(arena: &'a Bump, old: &mut Configuration<'a>, new: Configuration<'a>) {
    if old.repairs == new.repairs {
        return;
    }
    let (r, ms) = match old.repairs.val() {
        Some(RepairMerge::Repair(r)) => (*r, Cactus::new()),
        Some(RepairMerge::Merge(r, ms)) => (*r, *ms),
        // Only the starting configuration has no repairs, and nothing else shares its
        // repair history.
        None | Some(RepairMerge::Terminator) => unreachable!(),
    };
    let parent = old.repairs.parent().unwrap();
    old.repairs = parent.child(arena, RepairMerge::Merge(r, ms.child(arena, new.repairs)));
}

fn top(stack: &Cactus<StateId>) -> StateId {
    *stack.val().unwrap()
}

fn reduce<'a>(
    arena: &'a Bump,
    table: &StateTable,
    stack: Cactus<'a, StateId>,
    p: ProdId,
) -> Cactus<'a, StateId> {
    let mut st = stack;
    for _ in 0..table.prod_len(p) {
        st = st.parent().unwrap();
    }
    let g = table.goto(top(&st), table.prod_rule(p)).unwrap();
    st.child(arena, g)
}

/// Parses `toks[offset..end]`, stopping early at an error or accept action. Returns the
/// offset reached and the resulting stack.
pub(crate) fn lr_run<'a>(
    arena: &'a Bump,
    table: &StateTable,
    toks: &[Token],
    mut offset: usize,
    end: usize,
    mut stack: Cactus<'a, StateId>,
) -> (usize, Cactus<'a, StateId>) {
    while offset < end {
        match table.action(top(&stack), toks[offset].kind) {
            Action::Shift(s) => {
                stack = stack.child(arena, s);
                offset += 1;
            }
            Action::Reduce(p) => stack = reduce(arena, table, stack, p),
            Action::Accept | Action::Error => break,
        }
    }
    (offset, stack)
}

/// Feeds a single token `t` to the parser, returning the stack after `t` is shifted.
fn lr_insert<'a>(
    arena: &'a Bump,
    table: &StateTable,
    mut stack: Cactus<'a, StateId>,
    t: TokenId,
) -> Option<Cactus<'a, StateId>> {
    loop {
        match table.action(top(&stack), t) {
            Action::Shift(s) => return Some(stack.child(arena, s)),
            Action::Reduce(p) => stack = reduce(arena, table, stack, p),
            Action::Accept | Action::Error => return None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum SearchFailure {
    #[error("recovery timed out")]
    Timeout,
    #[error("no repair sequence found")]
    Exhausted,
}

/// The successful configurations of a completed search, all of cost `cost`.
#[derive(Clone, Debug)]
pub struct SearchResult<'a> {
    pub cost: u32,
    pub successes: Vec<Configuration<'a>>,
}

impl SearchResult<'_> {
    /// All successful repair sequences, trailing shifts pruned, before ranking.
    pub fn sequences(&self) -> BTreeSet<Vec<Repair>> {
        self.successes
            .iter()
            .flat_map(|c| c.sequences())
            .map(|mut s| {
                prune_trailing_shifts(&mut s);
                s
            })
            .collect()
    }
}

struct Searcher<'a, 's> {
    arena: &'a Bump,
    table: &'s StateTable,
    toks: &'s [Token],
    params: &'s RecoveryParams,
}

impl<'a> Searcher<'a, '_> {
    fn is_success(&self, n: &Configuration) -> bool {
        n.trailing_shifts(self.params.n_shifts) == self.params.n_shifts
            || self.table.action(top(&n.stack), self.toks[n.offset].kind) == Action::Accept
    }

    fn neighbours(&self, n: &Configuration<'a>, out: &mut Vec<Configuration<'a>>) {
        let eof = self.table.eof();
        if n.last_repair() != Some(Repair::Delete) {
            for t in self.table.state_actions(top(&n.stack)) {
                if t == eof {
                    continue;
                }
                if let Some(stack) = lr_insert(self.arena, self.table, n.stack, t) {
                    out.push(Configuration {
                        stack,
                        offset: n.offset,
                        repairs: n
                            .repairs
                            .child(self.arena, RepairMerge::Repair(Repair::Insert(t))),
                        cost: n.cost + self.params.token_cost(t),
                    });
                }
            }
        }

        let la = self.toks[n.offset].kind;
        if la != eof {
            out.push(Configuration {
                stack: n.stack,
                offset: n.offset + 1,
                repairs: n
                    .repairs
                    .child(self.arena, RepairMerge::Repair(Repair::Delete)),
                cost: n.cost + self.params.token_cost(la),
            });
        }

        let max_shifts = match self.params.shift_rule {
            ShiftRule::Shift3 => 1,
            ShiftRule::Shift1 | ShiftRule::Shift2 => self.params.n_shifts,
        };
        let (offset, stack) = lr_run(
            self.arena,
            self.table,
            self.toks,
            n.offset,
            n.offset + max_shifts,
            n.stack,
        );
        let j = offset - n.offset;
        if j > 0 {
            let mut repairs = n.repairs;
            for _ in 0..j {
                repairs = repairs.child(self.arena, RepairMerge::Repair(Repair::Shift));
            }
            out.push(Configuration {
                stack,
                offset,
                repairs,
                cost: n.cost,
            });
        } else if self.params.shift_rule != ShiftRule::Shift1 && stack != n.stack {
            out.push(Configuration {
                stack,
                offset,
                repairs: n.repairs,
                cost: n.cost,
            });
        }
    }

    fn run(
        &self,
        stack: &[StateId],
        offset: usize,
        deadline: Instant,
    ) -> Result<SearchResult<'a>, SearchFailure> {
        let mut todo = TodoQueue {
            buckets: Vec::new(),
            merge: self.params.merge_configurations,
            arena: self.arena,
        };
        todo.push(Configuration {
            stack: Cactus::from_slice(self.arena, stack),
            offset,
            repairs: Cactus::new().child(self.arena, RepairMerge::Terminator),
            cost: 0,
        });
        let max_cost = self.params.max_cost.unwrap_or(u32::MAX);
        let mut next = Vec::new();
        let mut successes = Vec::new();

        let mut c = 0usize;
        loop {
            if Instant::now() >= deadline {
                return Err(SearchFailure::Timeout);
            }
            let Some(n) = todo.pop(c) else {
                c += 1;
                if c >= todo.buckets.len() || c as u64 > max_cost as u64 {
                    return Err(SearchFailure::Exhausted);
                }
                continue;
            };
            if self.is_success(&n) {
                successes.push(n);
                break;
            }
            self.neighbours(&n, &mut next);
            for nbr in next.drain(..) {
                if nbr.cost <= max_cost {
                    todo.push(nbr);
                }
            }
        }

        while let Some(n) = todo.pop(c) {
            if Instant::now() >= deadline {
                return Err(SearchFailure::Timeout);
            }
            if self.is_success(&n) {
                successes.push(n);
                continue;
            }
            self.neighbours(&n, &mut next);
            for nbr in next.drain(..) {
                if nbr.cost as usize == c {
                    todo.push(nbr);
                }
            }
        }

        Ok(SearchResult {
            cost: c as u32,
            successes,
        })
    }
}

/// Finds every minimum cost successful configuration for an error at `toks[offset]` with
/// parse stack `stack` (bottom first). Search state is allocated in `arena`.
pub fn search<'a>(
    arena: &'a Bump,
    table: &StateTable,
    stack: &[StateId],
    toks: &[Token],
    offset: usize,
    params: &RecoveryParams,
    deadline: Instant,
) -> Result<SearchResult<'a>, SearchFailure> {
    Searcher {
        arena,
        table,
        toks,
        params,
    }
    .run(stack, offset, deadline)
}

/// How far parsing gets from `cfg`, capped at `error_offset + n_try`. Reaching accept counts
/// as the cap.
fn continuation(
    arena: &Bump,
    table: &StateTable,
    toks: &[Token],
    cfg: &Configuration,
    cap: usize,
) -> usize {
    let (offset, stack) = lr_run(
        arena,
        table,
        toks,
        cfg.offset,
        cap.min(toks.len()),
        cfg.stack,
    );
    if offset >= cap || table.action(top(&stack), toks[offset].kind) == Action::Accept {
        cap
    } else {
        offset
    }
}

/// Keeps the configurations that parse furthest (or, with `reverse`, least far), expands them
/// into deduplicated sequences with trailing shifts pruned, and orders them. Sequences that
/// insert an `avoid_insert` token go last.
pub fn rank(
    table: &StateTable,
    toks: &[Token],
    error_offset: usize,
    params: &RecoveryParams,
    result: &SearchResult,
    reverse: bool,
) -> Vec<Vec<Repair>> {
    let cap = error_offset + params.n_try;
    let scores: Vec<usize> = result
        .successes
        .iter()
        .map(|c| {
            let scratch = Bump::new();
            continuation(&scratch, table, toks, c, cap)
        })
        .collect();
    let best = if reverse {
        scores.iter().min()
    } else {
        scores.iter().max()
    };
    let Some(&best) = best else {
        return Vec::new();
    };
    let mut seen = HashSet::new();
    let mut seqs = Vec::new();
    for (cfg, score) in result.successes.iter().zip(&scores) {
        if *score != best {
            continue;
        }
        for mut s in cfg.sequences() {
            prune_trailing_shifts(&mut s);
            if seen.insert(s.clone()) {
                seqs.push(s);
            }
        }
    }
    if params.deterministic_order {
        seqs.sort();
    }
    seqs.sort_by_key(|s| {
        s.iter()
            .any(|r| matches!(r, Repair::Insert(t) if params.avoid_insert.contains(t)))
    });
    seqs
}

/// Searches and ranks. The first returned sequence is the one to apply.
pub fn recover(
    table: &StateTable,
    stack: &[StateId],
    toks: &[Token],
    offset: usize,
    params: &RecoveryParams,
    deadline: Instant,
    reverse: bool,
) -> Result<(Vec<Vec<Repair>>, u32), SearchFailure> {
    let arena = Bump::new();
    let result = search(&arena, table, stack, toks, offset, params, deadline)?;
    Ok((
        rank(table, toks, offset, params, &result, reverse),
        result.cost,
    ))
}

#[cfg(test)]
mod tests {
    use std::time::Duration;

    use super::*;
    use crate::fixtures;
    use crate::parser::first_error;
    use crate::recovery::render_sequence;
    use crate::Language;

    fn far() -> Instant {
        Instant::now() + Duration::from_secs(60)
    }

    fn at_error(lang: &Language, src: &str) -> (Vec<Token>, Vec<StateId>, usize) {
        let toks = lang.lex(src).unwrap();
        let (stack, i) = first_error(&lang.table, &toks).unwrap();
        (toks, stack.0, i)
    }

    fn rendered(lang: &Language, src: &str, params: &RecoveryParams) -> BTreeSet<String> {
        let (toks, stack, i) = at_error(lang, src);
        let arena = Bump::new();
        match search(&arena, &lang.table, &stack, &toks, i, params, far()) {
            Ok(r) => r
                .sequences()
                .iter()
                .map(|s| render_sequence(&lang.grammar, src, &toks, i, s))
                .collect(),
            Err(_) => BTreeSet::new(),
        }
    }

    fn strs(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn shift_rules_on_2_3_plus() {
        let lang = fixtures::calc();
        let shift2 = strs(&[
            "Delete 3, Delete +",
            "Delete 3, Shift +, Insert INT",
            "Insert +, Shift 3, Shift +, Insert INT",
            "Insert *, Shift 3, Shift +, Insert INT",
        ]);
        let mut shift3 = shift2.clone();
        shift3.extend(strs(&[
            "Insert *, Shift 3, Delete +",
            "Insert +, Shift 3, Delete +",
        ]));

        let mut p = lang.params();
        p.shift_rule = ShiftRule::Shift2;
        assert_eq!(rendered(&lang, "2 3 +", &p), shift2);
        p.shift_rule = ShiftRule::Shift3;
        assert_eq!(rendered(&lang, "2 3 +", &p), shift3);
        p.shift_rule = ShiftRule::Shift1;
        p.max_cost = Some(4);
        assert!(rendered(&lang, "2 3 +", &p).is_empty());
    }

    #[test]
    fn merging_keeps_every_sequence() {
        let lang = fixtures::calc();
        let (toks, stack, i) = at_error(&lang, "2 3 +");
        let arena = Bump::new();
        let p = lang.params();
        let merged = search(&arena, &lang.table, &stack, &toks, i, &p, far()).unwrap();
        assert_eq!(merged.successes.len(), 5);
        let unmerged = RecoveryParams {
            merge_configurations: false,
            ..p
        };
        let plain = search(&arena, &lang.table, &stack, &toks, i, &unmerged, far()).unwrap();
        assert!(plain.successes.len() > 5);
        assert_eq!(merged.cost, plain.cost);
        assert_eq!(merged.sequences(), plain.sequences());
    }

    #[test]
    fn costs_are_sound_and_eof_is_never_inserted() {
        let lang = fixtures::stmts();
        let eof = lang.grammar.eof();
        for src in ["a = ", "a = ( 1 ; b ) ;", "1 1 = 2 ;", "( ( ( a"] {
            let (toks, stack, i) = at_error(&lang, src);
            let arena = Bump::new();
            let p = lang.params();
            let r = search(&arena, &lang.table, &stack, &toks, i, &p, far()).unwrap();
            for s in r.sequences() {
                assert_eq!(p.sequence_cost(&toks, i, &s), r.cost, "{src}: {s:?}");
                assert!(!s.contains(&Repair::Insert(eof)));
                assert_ne!(s.last(), Some(&Repair::Shift));
            }
        }
    }

    #[test]
    fn no_insert_straight_after_delete() {
        let lang = fixtures::calc();
        let (toks, stack, i) = at_error(&lang, "2 ( ( 3");
        let arena = Bump::new();
        let r = search(&arena, &lang.table, &stack, &toks, i, &lang.params(), far()).unwrap();
        for s in r.sequences() {
            assert!(s
                .windows(2)
                .all(|w| !(w[0] == Repair::Delete && matches!(w[1], Repair::Insert(_)))));
        }
    }

    #[test]
    fn ranking_prefers_longer_parses() {
        let lang = fixtures::stmts();
        let src = "a ) ; ( ) b ;";
        let (toks, stack, i) = at_error(&lang, src);
        let p = lang.params();
        let (best, c1) = recover(&lang.table, &stack, &toks, i, &p, far(), false).unwrap();
        let (worst, c2) = recover(&lang.table, &stack, &toks, i, &p, far(), true).unwrap();
        assert_eq!(c1, 3);
        assert_eq!(c1, c2);
        assert!(best.iter().all(|s| s[0] == Repair::Delete));
        assert!(worst.iter().all(|s| matches!(s[0], Repair::Insert(_))));

        let plus = lang.parse_tokens(&toks, crate::recovery::RecovererKind::CPCTPlus, p.clone());
        let rev = lang.parse_tokens(&toks, crate::recovery::RecovererKind::CPCTPlusRev, p);
        assert!(plus.stats.error_locations < rev.stats.error_locations);
    }

    #[test]
    fn avoided_inserts_rank_last() {
        let lang = fixtures::calc();
        let (toks, stack, i) = at_error(&lang, "2 + + 3");
        let mut p = lang.params();
        p.avoid_insert.insert(lang.grammar.token_id("INT").unwrap());
        let (seqs, _) = recover(&lang.table, &stack, &toks, i, &p, far(), false).unwrap();
        assert_eq!(
            seqs,
            vec![
                vec![Repair::Delete],
                vec![Repair::Insert(lang.grammar.token_id("INT").unwrap())]
            ]
        );
    }

    #[test]
    fn deadline_and_cost_limits() {
        let lang = fixtures::calc();
        let (toks, stack, i) = at_error(&lang, "2 3 +");
        let arena = Bump::new();
        let p = lang.params();
        let past = Instant::now();
        assert_eq!(
            search(&arena, &lang.table, &stack, &toks, i, &p, past).unwrap_err(),
            SearchFailure::Timeout
        );
        let capped = RecoveryParams {
            max_cost: Some(1),
            ..p
        };
        assert_eq!(
            search(&arena, &lang.table, &stack, &toks, i, &capped, far()).unwrap_err(),
            SearchFailure::Exhausted
        );
    }

    #[test]
    fn token_costs_change_the_minimum() {
        let lang = fixtures::calc();
        let int = lang.grammar.token_id("INT").unwrap();
        let mut costs = vec![1; lang.grammar.tokens_len()];
        costs[int.index()] = 5;
        let p = RecoveryParams {
            token_costs: Some(costs),
            ..lang.params()
        };
        assert_eq!(rendered(&lang, "2 + + 3", &p), strs(&["Delete +"]));
    }
}
