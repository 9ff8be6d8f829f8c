//! Brute-force minimum cost repair enumeration.
//!
//! Tries every interleaving of inserts, deletes and single-token shifts, with plain vectors
//! for stacks and no merging, by depth-first search under an increasing cost bound. Only the
//! rule that an insert never directly follows a delete is used to cut the search. It is far
//! too slow for real use and exists to check [`cpctplus`](super::cpctplus) against.

use std::collections::BTreeSet;

use crate::lexer::Token;
use crate::lrtable::{Action, StateId, StateTable};
use crate::recovery::{prune_trailing_shifts, Repair};

struct Oracle<'a> {
    table: &'a StateTable,
    toks: &'a [Token],
    n_shifts: usize,
    found: BTreeSet<Vec<Repair>>,
}

enum Fed {
    Shifted,
    Stuck,
}

impl Oracle<'_> {
    /// Applies reductions for lookahead `t`, then shifts it if possible.
    fn feed(&self, stack: &mut Vec<StateId>, t: crate::grammar::TokenId) -> Fed {
        loop {
            match self.table.action(*stack.last().unwrap(), t) {
                Action::Shift(s) => {
                    stack.push(s);
                    return Fed::Shifted;
                }
                Action::Reduce(p) => {
                    let n = self.table.prod_len(p);
                    stack.truncate(stack.len() - n);
                    let g = self
                        .table
                        .goto(*stack.last().unwrap(), self.table.prod_rule(p))
                        .unwrap();
                    stack.push(g);
                }
                Action::Accept | Action::Error => return Fed::Stuck,
            }
        }
    }

    fn succeeded(&self, stack: &[StateId], offset: usize, repairs: &[Repair]) -> bool {
        let n = self.n_shifts;
        (repairs.len() >= n
            && repairs[repairs.len() - n..]
                .iter()
                .all(|r| *r == Repair::Shift))
            || self
                .table
                .action(*stack.last().unwrap(), self.toks[offset].kind)
                == Action::Accept
    }

    fn dfs(&mut self, stack: Vec<StateId>, offset: usize, repairs: &mut Vec<Repair>, budget: u32) {
        if self.succeeded(&stack, offset, repairs) {
            if budget == 0 {
                let mut s = repairs.clone();
                prune_trailing_shifts(&mut s);
                self.found.insert(s);
            }
            return;
        }
        let eof = self.table.eof();
        if budget > 0 && repairs.last() != Some(&Repair::Delete) {
            for t in (0..self.table.tokens_len() as u32).map(crate::grammar::TokenId) {
                if t == eof || self.table.action(*stack.last().unwrap(), t) == Action::Error {
                    continue;
                }
                let mut st = stack.clone();
                if let Fed::Shifted = self.feed(&mut st, t) {
                    repairs.push(Repair::Insert(t));
                    self.dfs(st, offset, repairs, budget - 1);
                    repairs.pop();
                }
            }
        }
        let la = self.toks[offset].kind;
        if budget > 0 && la != eof {
            repairs.push(Repair::Delete);
            self.dfs(stack.clone(), offset + 1, repairs, budget - 1);
            repairs.pop();
        }
        let mut st = stack.clone();
        match self.feed(&mut st, la) {
            Fed::Shifted => {
                repairs.push(Repair::Shift);
                self.dfs(st, offset + 1, repairs, budget);
                repairs.pop();
            }
            Fed::Stuck => {
                if st != stack {
                    self.dfs(st, offset, repairs, budget);
                }
            }
        }
    }
}

/// All minimum cost repair sequences (trailing shifts pruned) for an error at `toks[offset]`
/// with parse stack `stack`, if one exists with cost at most `max_cost`. Every insert and
/// delete costs 1. Returns the cost and the sequences.
pub fn min_repairs(
    table: &StateTable,
    stack: &[StateId],
    toks: &[Token],
    offset: usize,
    n_shifts: usize,
    max_cost: u32,
) -> Option<(u32, BTreeSet<Vec<Repair>>)> {
    let mut o = Oracle {
        table,
        toks,
        n_shifts,
        found: BTreeSet::new(),
    };
    for cost in 0..=max_cost {
        o.dfs(stack.to_vec(), offset, &mut Vec::new(), cost);
        if !o.found.is_empty() {
            return Some((cost, o.found));
        }
    }
    None
}
