//! The LR driver: parses a token stream, building a parse tree, and calls a recoverer on
//! syntax errors.

use std::fmt::Write;
use std::time::{Duration, Instant};

use crate::grammar::{Grammar, ProdId, RuleId, TokenId};
use crate::lexer::{Provenance, Token};
use crate::lrtable::{Action, StateId, StateTable};
use crate::recovery::{
    cpctplus, panic, RecovererKind, RecoveryParams, RecoveryReport, Repair, ReportKind,
};

/// A parse stack. The bottom entry is always state 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseStack(pub Vec<StateId>);

impl ParseStack {
    pub fn new() -> Self {
        ParseStack(vec![StateId(0)])
    }

    pub fn top(&self) -> StateId {
        *self.0.last().unwrap()
    }
}

impl Default for ParseStack {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Shift,
    Reduce(ProdId),
    Accept,
    Error,
}

/// Performs a single shift or reduce (with its goto) for lookahead `tok`.
pub fn lr_step(table: &StateTable, stack: &mut ParseStack, tok: TokenId) -> Step {
    match table.action(stack.top(), tok) {
        Action::Shift(s) => {
            stack.0.push(s);
            Step::Shift
        }
        Action::Reduce(p) => {
            let n = table.prod_len(p);
            stack.0.truncate(stack.0.len() - n);
            let g = table.goto(stack.top(), table.prod_rule(p)).unwrap();
            stack.0.push(g);
            Step::Reduce(p)
        }
        Action::Accept => Step::Accept,
        Action::Error => Step::Error,
    }
}

/// Parses without recovery. Returns the stack and token index at the first error, or `None`
/// if the input is accepted.
pub fn first_error(table: &StateTable, toks: &[Token]) -> Option<(ParseStack, usize)> {
    let mut stack = ParseStack::new();
    let mut i = 0;
    loop {
        match lr_step(table, &mut stack, toks[i].kind) {
            Step::Shift => i += 1,
            Step::Reduce(_) => (),
            Step::Accept => return None,
            Step::Error => return Some((stack, i)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Term(Token),
    Nonterm {
        rule: RuleId,
        prod: ProdId,
        children: Vec<Node>,
    },
}

impl Node {
    /// Leaf tokens, left to right.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::new();
        let mut todo = vec![self];
        while let Some(n) = todo.pop() {
            match n {
                Node::Term(t) => out.push(*t),
                Node::Nonterm { children, .. } => todo.extend(children.iter().rev()),
            }
        }
        out
    }

    /// An indented rendering: one line per node, one space per level of depth. Inserted
    /// tokens are marked.
    pub fn pp(&self, grm: &Grammar, src: &str) -> String {
        let mut out = String::new();
        let mut todo = vec![(self, 0)];
        while let Some((n, depth)) = todo.pop() {
            out.extend(std::iter::repeat_n(' ', depth));
            match n {
                Node::Term(t) => match t.provenance {
                    Provenance::Real => {
                        writeln!(out, "{} {}", grm.token_name(t.kind), t.lexeme(src).unwrap())
                            .unwrap()
                    }
                    Provenance::Inserted => {
                        writeln!(out, "{} <inserted>", grm.token_name(t.kind)).unwrap()
                    }
                },
                Node::Nonterm { rule, children, .. } => {
                    writeln!(out, "{}", grm.rule_name(*rule)).unwrap();
                    todo.extend(children.iter().rev().map(|c| (c, depth + 1)));
                }
            }
        }
        out
    }
}

/// Per-file recovery statistics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    /// Total time spent in recovery.
    pub recovery_time: Duration,
    /// False if recovery failed at some error location.
    pub success: bool,
    /// Number of times the recoverer was invoked.
    pub error_locations: usize,
    /// Cost of each applied repair sequence.
    pub costs: Vec<u32>,
    /// Tokens removed by recovery (deletes, or tokens skipped by panic mode).
    pub tokens_deleted: usize,
    /// Tokens in the input, excluding EOF.
    pub real_tokens: usize,
}

impl RunStats {
    pub fn tokens_skipped_pct(&self) -> f64 {
        if self.real_tokens == 0 {
            0.0
        } else {
            self.tokens_deleted as f64 / self.real_tokens as f64 * 100.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseResult {
    /// Present if the parse reached accept.
    pub tree: Option<Node>,
    pub reports: Vec<RecoveryReport>,
    /// True if every error was recovered from.
    pub recovery_succeeded: bool,
    pub stats: RunStats,
}

pub struct Parser<'a> {
    table: &'a StateTable,
    recoverer: RecovererKind,
    params: RecoveryParams,
}

struct Run<'t> {
    table: &'t StateTable,
    stack: ParseStack,
    nodes: Vec<Node>,
}

enum Fed {
    Shifted,
    Accepted,
    Error,
}

impl Run<'_> {
    fn feed(&mut self, tok: Token) -> Fed {
        loop {
            match lr_step(self.table, &mut self.stack, tok.kind) {
                Step::Shift => {
                    self.nodes.push(Node::Term(tok));
                    return Fed::Shifted;
                }
                Step::Reduce(p) => {
                    let n = self.table.prod_len(p);
                    let children = self.nodes.split_off(self.nodes.len() - n);
                    self.nodes.push(Node::Nonterm {
                        rule: self.table.prod_rule(p),
                        prod: p,
                        children,
                    });
                }
                Step::Accept => return Fed::Accepted,
                Step::Error => return Fed::Error,
            }
        }
    }
}

impl<'a> Parser<'a> {
    pub fn new(table: &'a StateTable, recoverer: RecovererKind, params: RecoveryParams) -> Self {
        Parser {
            table,
            recoverer,
            params,
        }
    }

    /// Parses `toks`, which must end with EOF.
    pub fn parse(&self, toks: &[Token]) -> ParseResult {
        let mut run = Run {
            table: self.table,
            stack: ParseStack::new(),
            nodes: Vec::new(),
        };
        let mut stats = RunStats {
            success: true,
            real_tokens: toks.len() - 1,
            ..Default::default()
        };
        let mut reports = Vec::new();
        let mut i = 0;
        // Guards against panic mode resuming at a token that immediately errors again.
        let mut panic_resumed_at: Option<usize> = None;

        loop {
            match run.feed(toks[i]) {
                Fed::Shifted => {
                    i += 1;
                    panic_resumed_at = None;
                    continue;
                }
                Fed::Accepted => {
                    let tree = run.nodes.pop();
                    return ParseResult {
                        tree,
                        reports,
                        recovery_succeeded: stats.success,
                        stats,
                    };
                }
                Fed::Error => (),
            }

            stats.error_locations += 1;
            let err_at = i;
            let remaining = self.params.timeout.saturating_sub(stats.recovery_time);
            let started = Instant::now();
            let deadline = started + remaining;
            let kind = match self.recoverer {
                RecovererKind::None => ReportKind::Failed,
                RecovererKind::Panic => {
                    let from = if panic_resumed_at == Some(i) {
                        i + 1
                    } else {
                        i
                    };
                    match panic::recover(self.table, &run.stack.0, toks, from) {
                        Some(r) => {
                            let popped = run.stack.0.len() - r.stack_len;
                            run.stack.0.truncate(r.stack_len);
                            run.nodes.truncate(r.stack_len - 1);
                            let skipped = r.offset - i;
                            stats.tokens_deleted += skipped;
                            i = r.offset;
                            panic_resumed_at = Some(i);
                            ReportKind::Panic { popped, skipped }
                        }
                        None => ReportKind::Failed,
                    }
                }
                RecovererKind::CPCTPlus | RecovererKind::CPCTPlusRev => {
                    let rev = self.recoverer == RecovererKind::CPCTPlusRev;
                    match cpctplus::recover(
                        self.table,
                        &run.stack.0,
                        toks,
                        i,
                        &self.params,
                        deadline,
                        rev,
                    ) {
                        Ok((sequences, cost)) => {
                            let at = toks[i].span.start;
                            for r in &sequences[0] {
                                let fed = match r {
                                    Repair::Insert(t) => run.feed(Token::inserted(*t, at)),
                                    Repair::Delete => {
                                        i += 1;
                                        stats.tokens_deleted += 1;
                                        continue;
                                    }
                                    Repair::Shift => {
                                        i += 1;
                                        run.feed(toks[i - 1])
                                    }
                                };
                                debug_assert!(matches!(fed, Fed::Shifted));
                            }
                            stats.costs.push(cost);
                            ReportKind::Repairs {
                                sequences,
                                applied: 0,
                                cost,
                            }
                        }
                        Err(_) => ReportKind::Failed,
                    }
                }
            };
            stats.recovery_time += started.elapsed();
            let failed = kind == ReportKind::Failed;
            reports.push(RecoveryReport {
                token_index: err_at,
                byte_offset: toks[err_at].span.start,
                kind,
            });
            if failed {
                stats.success = false;
                return ParseResult {
                    tree: None,
                    reports,
                    recovery_succeeded: false,
                    stats,
                };
            }
        }
    }
}
