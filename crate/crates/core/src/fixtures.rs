//! Small grammars used by the tests, examples and benchmarks.

use crate::language::Language;

pub const CALC_Y: &str = include_str!("../grammars/calc.y");
pub const CALC_L: &str = include_str!("../grammars/calc.l");
pub const STMTS_Y: &str = include_str!("../grammars/stmts.y");
pub const STMTS_L: &str = include_str!("../grammars/stmts.l");
pub const BRACKETS_Y: &str = include_str!("../grammars/brackets.y");
pub const BRACKETS_L: &str = include_str!("../grammars/brackets.l");
pub const EXPRS_Y: &str = include_str!("../grammars/exprs.y");
pub const EXPRS_L: &str = include_str!("../grammars/exprs.l");
pub const MINIJAVA_Y: &str = include_str!("../grammars/minijava.y");
pub const MINIJAVA_L: &str = include_str!("../grammars/minijava.l");

/// The expression grammar: `Expr: Term '+' Expr | Term`, `Term: Factor '*' Term | Factor`,
/// `Factor: '(' Expr ')' | INT`.
pub fn calc() -> Language {
    Language::new(CALC_Y, CALC_L).unwrap()
}

/// Assignments and expression statements.
pub fn stmts() -> Language {
    Language::new(STMTS_Y, STMTS_L).unwrap()
}

/// Nested `()`/`[]` groups of `x`.
pub fn brackets() -> Language {
    Language::new(BRACKETS_Y, BRACKETS_L).unwrap()
}

/// Expressions with calls, indexing, blocks and four bracket kinds.
pub fn exprs() -> Language {
    Language::new(EXPRS_Y, EXPRS_L).unwrap()
}

/// A tiny subset of Java class declarations.
pub fn minijava() -> Language {
    Language::new(MINIJAVA_Y, MINIJAVA_L).unwrap()
}
