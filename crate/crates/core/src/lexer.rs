//! Lex-like longest-match lexing.
//!
//! A lexer spec has one rule per line: a regular expression, whitespace, then either a token
//! name (bare, or quoted as in the grammar) or `;` to skip the match. An optional `%%` line
//! before the rules is ignored, as are blank lines and lines starting with `//`.
//!
//! ```text
//! %%
//! [0-9]+ "INT"
//! \+ '+'
//! [ \t\n]+ ;
//! ```

use regex::Regex;
use thiserror::Error;

use crate::grammar::{Grammar, TokenId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Whether a token came from the user's input or was fabricated by error recovery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Real,
    /// Inserted tokens have a type, a zero-width span, and no lexeme.
    Inserted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenId,
    pub span: Span,
    pub provenance: Provenance,
}

impl Token {
    pub fn real(kind: TokenId, span: Span) -> Self {
        Token {
            kind,
            span,
            provenance: Provenance::Real,
        }
    }

    pub fn inserted(kind: TokenId, at: usize) -> Self {
        Token {
            kind,
            span: Span::new(at, at),
            provenance: Provenance::Inserted,
        }
    }

    /// The token's text, or `None` for inserted tokens.
    pub fn lexeme<'a>(&self, src: &'a str) -> Option<&'a str> {
        match self.provenance {
            Provenance::Real => Some(&src[self.span.start..self.span.end]),
            Provenance::Inserted => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LexAction {
    Emit(String),
    Skip,
}

#[derive(Clone, Debug)]
pub struct LexRule {
    pub pattern: String,
    pub action: LexAction,
    regex: Regex,
}

/// A parsed, not yet grammar-bound, lexer specification.
#[derive(Clone, Debug)]
pub struct LexSpec {
    pub rules: Vec<LexRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LexSpecError {
    #[error("line {line}: expected `pattern TOKEN` or `pattern ;`")]
    Malformed { line: usize },
    #[error("line {line}: invalid pattern: {msg}")]
    BadPattern { line: usize, msg: String },
    #[error("line {line}: token '{name}' is not defined by the grammar")]
    UnknownToken { line: usize, name: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no lexer rule matches at byte offset {offset}")]
pub struct LexError {
    pub offset: usize,
}

fn unquote(s: &str) -> &str {
    let b = s.as_bytes();
    if b.len() >= 2 && (b[0] == b'"' || b[0] == b'\'') && b[b.len() - 1] == b[0] {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

impl LexSpec {
    pub fn parse(src: &str) -> Result<LexSpec, LexSpecError> {
        let mut rules = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let lno = i + 1;
            let l = line.trim();
            if l.is_empty() || l == "%%" || l.starts_with("//") {
                continue;
            }
            let split = l
                .rfind(|c: char| c.is_whitespace())
                .ok_or(LexSpecError::Malformed { line: lno })?;
            let pattern = l[..split].trim_end();
            let target = &l[split + 1..];
            if pattern.is_empty() {
                return Err(LexSpecError::Malformed { line: lno });
            }
            let action = if target == ";" {
                LexAction::Skip
            } else {
                LexAction::Emit(unquote(target).to_owned())
            };
            let regex =
                Regex::new(&format!("^(?:{})", pattern)).map_err(|e| LexSpecError::BadPattern {
                    line: lno,
                    msg: e.to_string(),
                })?;
            rules.push(LexRule {
                pattern: pattern.to_owned(),
                action,
                regex,
            });
        }
        Ok(LexSpec { rules })
    }

    /// Pairs the spec with a grammar, resolving token names to token ids.
    pub fn bind(&self, grm: &Grammar) -> Result<Lexer, LexSpecError> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for (i, r) in self.rules.iter().enumerate() {
            let kind = match &r.action {
                LexAction::Skip => None,
                LexAction::Emit(name) => match grm.token_id(name) {
                    Some(t) if t != grm.eof() => Some(t),
                    _ => {
                        return Err(LexSpecError::UnknownToken {
                            line: i + 1,
                            name: name.clone(),
                        })
                    }
                },
            };
            rules.push((r.regex.clone(), kind));
        }
        Ok(Lexer {
            rules,
            eof: grm.eof(),
        })
    }
}

/// A lexer bound to a grammar's token ids.
#[derive(Clone, Debug)]
pub struct Lexer {
    rules: Vec<(Regex, Option<TokenId>)>,
    eof: TokenId,
}

impl Lexer {
    /// Splits `src` into tokens by longest match, earliest rule winning ties, and appends an
    /// EOF token. Any position no rule matches rejects the whole input.
    pub fn lex(&self, src: &str) -> Result<Vec<Token>, LexError> {
        let mut toks = Vec::new();
        let mut pos = 0;
        while pos < src.len() {
            let rest = &src[pos..];
            let mut best: Option<(usize, Option<TokenId>)> = None;
            for (re, kind) in &self.rules {
                if let Some(m) = re.find(rest) {
                    let len = m.end();
                    if len > 0 && best.is_none_or(|(l, _)| len > l) {
                        best = Some((len, *kind));
                    }
                }
            }
            match best {
                Some((len, kind)) => {
                    if let Some(k) = kind {
                        toks.push(Token::real(k, Span::new(pos, pos + len)));
                    }
                    pos += len;
                }
                None => return Err(LexError { offset: pos }),
            }
        }
        toks.push(Token::real(self.eof, Span::new(src.len(), src.len())));
        Ok(toks)
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let col = before[line_start..].chars().count() + 1;
    (line, col)
}
