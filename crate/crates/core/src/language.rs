//! A grammar bundled with its statetable and lexer.

use thiserror::Error;

use crate::grammar::{parse_grammar, Grammar, GrammarErrors};
use crate::lexer::{LexError, LexSpec, LexSpecError, Lexer, Token};
use crate::lrtable::{build_stategraph, build_statetable, Conflict, StateTable};
use crate::parser::{ParseResult, Parser};
use crate::recovery::{RecovererKind, RecoveryParams};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Grammar(#[from] GrammarErrors),
    #[error("{0}")]
    LexSpec(#[from] LexSpecError),
}

#[derive(Clone, Debug)]
pub struct Language {
    pub grammar: Grammar,
    pub table: StateTable,
    pub lexer: Lexer,
}

impl Language {
    /// Builds a language from grammar and lexer sources, using Pager's state merging.
    pub fn new(grammar_src: &str, lex_src: &str) -> Result<Language, LoadError> {
        let grammar = parse_grammar(grammar_src)?;
        let lexer = LexSpec::parse(lex_src)?.bind(&grammar)?;
        let table = build_statetable(&build_stategraph(&grammar, true), &grammar);
        Ok(Language {
            grammar,
            table,
            lexer,
        })
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.table.conflicts
    }

    pub fn lex(&self, src: &str) -> Result<Vec<Token>, LexError> {
        self.lexer.lex(src)
    }

    /// Default recovery parameters, honouring the grammar's `%avoid_insert` declarations.
    pub fn params(&self) -> RecoveryParams {
        RecoveryParams::for_grammar(&self.grammar)
    }

    pub fn parse_tokens(
        &self,
        toks: &[Token],
        recoverer: RecovererKind,
        params: RecoveryParams,
    ) -> ParseResult {
        Parser::new(&self.table, recoverer, params).parse(toks)
    }
}
