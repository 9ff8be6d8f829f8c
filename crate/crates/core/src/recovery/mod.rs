//! Syntax error recovery.
//!
//! Two recoverers are provided: [`panic`] mode, which pops the stack and skips input until
//! parsing can resume, and [`cpctplus`], which searches for the complete set of minimum cost
//! repair sequences made of token insertions, deletions and shifts. [`oracle`] is a slow,
//! exhaustive search over the same repair rules, used to cross-check `cpctplus`.

pub mod cpctplus;
pub mod oracle;
pub mod panic;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::grammar::{Grammar, TokenId};
use crate::lexer::{line_col, Token};

/// An atomic repair. The derived order (delete, then inserts by token ordinal, then shift) is
/// the order used to sort sequences in deterministic mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Repair {
    Delete,
    Insert(TokenId),
    Shift,
}

/// Which recovery algorithm a parse uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RecovererKind {
    CPCTPlus,
    /// CPCT+ with its ranking inverted: keeps the repairs that let parsing continue the
    /// least far. Only useful for comparing against CPCT+.
    CPCTPlusRev,
    Panic,
    None,
}

impl fmt::Display for RecovererKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecovererKind::CPCTPlus => "cpctplus",
            RecovererKind::CPCTPlusRev => "cpctplus-rev",
            RecovererKind::Panic => "panic",
            RecovererKind::None => "none",
        })
    }
}

impl FromStr for RecovererKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cpctplus" => Ok(RecovererKind::CPCTPlus),
            "cpctplus-rev" => Ok(RecovererKind::CPCTPlusRev),
            "panic" => Ok(RecovererKind::Panic),
            "none" => Ok(RecovererKind::None),
            _ => Err(format!("unknown recoverer '{}'", s)),
        }
    }
}

/// The rule used to generate shift repairs during the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftRule {
    /// Shift between 1 and `n_shifts` tokens at once.
    Shift1,
    /// As `Shift1`, but a step that only reduces (shifting nothing) also counts.
    Shift2,
    /// At most one shift per step; a reduce-only step counts. The default.
    Shift3,
}

#[derive(Clone, Debug)]
pub struct RecoveryParams {
    /// Trailing shifts that mark a repair sequence as successful.
    pub n_shifts: usize,
    /// How many tokens past the error location ranking parses.
    pub n_try: usize,
    /// Total recovery time allowed per file.
    pub timeout: Duration,
    /// Sequences inserting any of these tokens are ranked last.
    pub avoid_insert: BTreeSet<TokenId>,
    /// Sort the reported sequences so output is reproducible.
    pub deterministic_order: bool,
    pub shift_rule: ShiftRule,
    pub merge_configurations: bool,
    /// Per-token insert/delete costs, indexed by token ordinal. `None` means every token
    /// costs 1.
    pub token_costs: Option<Vec<u32>>,
    /// Give up once the search would need to go beyond this cost.
    pub max_cost: Option<u32>,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            n_shifts: 3,
            n_try: 250,
            timeout: Duration::from_millis(500),
            avoid_insert: BTreeSet::new(),
            deterministic_order: false,
            shift_rule: ShiftRule::Shift3,
            merge_configurations: true,
            token_costs: None,
            max_cost: None,
        }
    }
}

impl RecoveryParams {
    /// Default parameters with the grammar's `%avoid_insert` tokens.
    pub fn for_grammar(grm: &Grammar) -> Self {
        RecoveryParams {
            avoid_insert: grm.avoid_insert().clone(),
            ..Default::default()
        }
    }

    pub fn token_cost(&self, t: TokenId) -> u32 {
        self.token_costs.as_ref().map_or(1, |c| c[t.index()])
    }

    /// The cost of applying `seq` at token offset `offset`. Shifts are free.
    pub fn sequence_cost(&self, toks: &[Token], offset: usize, seq: &[Repair]) -> u32 {
        let mut i = offset;
        let mut cost = 0;
        for r in seq {
            match r {
                Repair::Insert(t) => cost += self.token_cost(*t),
                Repair::Delete => {
                    cost += self.token_cost(toks[i].kind);
                    i += 1;
                }
                Repair::Shift => i += 1,
            }
        }
        cost
    }
}

/// Drops trailing shifts: they are evidence that a repair worked, not part of the repair.
pub fn prune_trailing_shifts(seq: &mut Vec<Repair>) {
    while seq.last() == Some(&Repair::Shift) {
        seq.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReportKind {
    /// Ranked minimum cost repair sequences; `applied` indexes the one used.
    Repairs {
        sequences: Vec<Vec<Repair>>,
        applied: usize,
        cost: u32,
    },
    /// Panic mode popped `popped` states and skipped `skipped` tokens.
    Panic { popped: usize, skipped: usize },
    /// No repair was found (timeout, exhausted search, or no recoverer).
    Failed,
}

/// What happened at one error location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryReport {
    /// Index of the token at which the error was detected.
    pub token_index: usize,
    /// Byte offset of that token.
    pub byte_offset: usize,
    pub kind: ReportKind,
}

impl RecoveryReport {
    pub fn succeeded(&self) -> bool {
        !matches!(self.kind, ReportKind::Failed)
    }

    pub fn line_col(&self, src: &str) -> (usize, usize) {
        line_col(src, self.byte_offset)
    }

    pub fn sequences(&self) -> &[Vec<Repair>] {
        match &self.kind {
            ReportKind::Repairs { sequences, .. } => sequences,
            _ => &[],
        }
    }

    pub fn applied(&self) -> Option<&[Repair]> {
        match &self.kind {
            ReportKind::Repairs {
                sequences, applied, ..
            } => Some(&sequences[*applied]),
            _ => None,
        }
    }
}

/// Renders a repair sequence as e.g. `Insert *, Shift 3, Delete +`. `offset` is the token
/// index the sequence starts at.
pub fn render_sequence(
    grm: &Grammar,
    src: &str,
    toks: &[Token],
    offset: usize,
    seq: &[Repair],
) -> String {
    let mut i = offset;
    let mut parts = Vec::with_capacity(seq.len());
    for r in seq {
        match r {
            Repair::Insert(t) => parts.push(format!("Insert {}", grm.token_name(*t))),
            Repair::Delete => {
                parts.push(format!("Delete {}", toks[i].lexeme(src).unwrap_or("")));
                i += 1;
            }
            Repair::Shift => {
                parts.push(format!("Shift {}", toks[i].lexeme(src).unwrap_or("")));
                i += 1;
            }
        }
    }
    parts.join(", ")
}
