//! Yacc-subset grammar files.
//!
//! The accepted format is a strict subset of Yacc:
//!
//! ```text
//! %start Expr
//! %token NAME ...
//! %left '+' '-'
//! %right '^'
//! %nonassoc '<'
//! %avoid_insert "INT" ...
//! %%
//! Expr: Term '+' Expr | Term ;
//! Term: Factor '*' Term { ignored action } | Factor %prec '*' ;
//! Empty: %empty | ;
//! %%
//! anything here is ignored
//! ```
//!
//! Quoted symbols (`'x'` or `"x"`) are tokens and are declared implicitly. Bare identifiers
//! refer to rules, or to tokens declared with `%token` (or one of the precedence
//! declarations). Action blocks are skipped without being interpreted; `%union` is rejected.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Ordinal of a token type. The EOF token is always the last ordinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

/// Ordinal of a rule (nonterminal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u32);

/// Ordinal of a production, global across all rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProdId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ProdId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A grammar symbol. Rules order before tokens, which fixes the order in which a state's
/// outgoing edges are numbered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Rule(RuleId),
    Token(TokenId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Assoc {
    Left,
    Right,
    NonAssoc,
}

impl Assoc {
    fn directive(self) -> &'static str {
        match self {
            Assoc::Left => "%left",
            Assoc::Right => "%right",
            Assoc::NonAssoc => "%nonassoc",
        }
    }
}

/// Precedence of a token: later declarations bind tighter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precedence {
    pub level: u32,
    pub assoc: Assoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenInfo {
    pub name: String,
    /// True if the token was written as a quoted literal in the grammar.
    pub literal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub prods: Vec<ProdId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub rule: RuleId,
    pub symbols: Vec<Symbol>,
    pub precedence_override: Option<TokenId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedenceDecl {
    pub assoc: Assoc,
    pub tokens: Vec<TokenId>,
}

/// A validated grammar. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    tokens: Vec<TokenInfo>,
    rules: Vec<Rule>,
    prods: Vec<Production>,
    start: RuleId,
    avoid_insert: BTreeSet<TokenId>,
    token_prec: Vec<Option<Precedence>>,
    prec_decls: Vec<PrecedenceDecl>,
}

pub const EOF_NAME: &str = "$";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrammarErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("duplicate rule '{0}'")]
    DuplicateRule(String),
    #[error("no start rule")]
    NoStartRule,
    #[error("start rule '{0}' is not defined")]
    UnknownStartRule(String),
    #[error("'{0}' is declared as a token but also defined as a rule")]
    TokenRuleClash(String),
    #[error("'{0}' is not a token")]
    NotAToken(String),
    #[error("%union is not supported")]
    Union,
    #[error("unknown directive '{0}'")]
    UnknownDirective(String),
    #[error("the end-of-file token cannot be referenced")]
    EofReferenced,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct GrammarError {
    pub kind: GrammarErrorKind,
    pub line: usize,
    pub col: usize,
}

/// Every violation found in a grammar file.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct GrammarErrors(pub Vec<GrammarError>);

impl fmt::Display for GrammarErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", e)?;
        }
        Ok(())
    }
}

impl Grammar {
    pub fn tokens_len(&self) -> usize {
        self.tokens.len()
    }

    pub fn rules_len(&self) -> usize {
        self.rules.len()
    }

    pub fn prods_len(&self) -> usize {
        self.prods.len()
    }

    pub fn eof(&self) -> TokenId {
        TokenId(self.tokens.len() as u32 - 1)
    }

    pub fn start_rule(&self) -> RuleId {
        self.start
    }

    pub fn token(&self, t: TokenId) -> &TokenInfo {
        &self.tokens[t.index()]
    }

    pub fn token_name(&self, t: TokenId) -> &str {
        &self.tokens[t.index()].name
    }

    pub fn token_id(&self, name: &str) -> Option<TokenId> {
        self.tokens
            .iter()
            .position(|t| t.name == name)
            .map(|i| TokenId(i as u32))
    }

    /// All token ids, EOF included (last).
    pub fn token_ids(&self) -> impl Iterator<Item = TokenId> {
        (0..self.tokens.len() as u32).map(TokenId)
    }

    pub fn rule(&self, r: RuleId) -> &Rule {
        &self.rules[r.index()]
    }

    pub fn rule_name(&self, r: RuleId) -> &str {
        &self.rules[r.index()].name
    }

    pub fn rule_id(&self, name: &str) -> Option<RuleId> {
        self.rules
            .iter()
            .position(|r| r.name == name)
            .map(|i| RuleId(i as u32))
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> {
        (0..self.rules.len() as u32).map(RuleId)
    }

    pub fn prod(&self, p: ProdId) -> &Production {
        &self.prods[p.index()]
    }

    pub fn prod_ids(&self) -> impl Iterator<Item = ProdId> {
        (0..self.prods.len() as u32).map(ProdId)
    }

    pub fn avoid_insert(&self) -> &BTreeSet<TokenId> {
        &self.avoid_insert
    }

    pub fn token_precedence(&self, t: TokenId) -> Option<Precedence> {
        self.token_prec[t.index()]
    }

    pub fn precedence_decls(&self) -> &[PrecedenceDecl] {
        &self.prec_decls
    }

    /// The precedence of a production: its `%prec` override, otherwise that of its
    /// rightmost token.
    pub fn prod_precedence(&self, p: ProdId) -> Option<Precedence> {
        let prod = self.prod(p);
        if let Some(t) = prod.precedence_override {
            return self.token_precedence(t);
        }
        prod.symbols.iter().rev().find_map(|s| match s {
            Symbol::Token(t) => Some(self.token_precedence(*t)),
            Symbol::Rule(_) => None,
        })?
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Rule(r) => self.rule_name(r),
            Symbol::Token(t) => self.token_name(t),
        }
    }

    fn pp_token(&self, t: TokenId) -> String {
        let info = self.token(t);
        if info.literal {
            quote(&info.name)
        } else {
            info.name.clone()
        }
    }

    fn pp_tokens(&self, ts: impl IntoIterator<Item = TokenId>) -> String {
        ts.into_iter()
            .map(|t| self.pp_token(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn quote(s: &str) -> String {
    if s.contains('\'') {
        format!("\"{}\"", s)
    } else {
        format!("'{}'", s)
    }
}

/// Pretty-prints the grammar in the same file format that [`parse_grammar`] accepts.
impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "%start {}", self.rule_name(self.start))?;
        // Declare every token explicitly, in ordinal order, so that a re-parse assigns the
        // same ordinals.
        let decl: Vec<TokenId> = self.token_ids().filter(|t| *t != self.eof()).collect();
        if !decl.is_empty() {
            writeln!(f, "%token {}", self.pp_tokens(decl))?;
        }
        for d in &self.prec_decls {
            writeln!(
                f,
                "{} {}",
                d.assoc.directive(),
                self.pp_tokens(d.tokens.iter().copied())
            )?;
        }
        if !self.avoid_insert.is_empty() {
            writeln!(
                f,
                "%avoid_insert {}",
                self.pp_tokens(self.avoid_insert.iter().copied())
            )?;
        }
        writeln!(f, "%%")?;
        for rule in &self.rules {
            write!(f, "{}:", rule.name)?;
            for (i, p) in rule.prods.iter().enumerate() {
                if i > 0 {
                    write!(f, "\n    |")?;
                }
                let prod = self.prod(*p);
                if prod.symbols.is_empty() {
                    write!(f, " %empty")?;
                }
                for s in &prod.symbols {
                    match s {
                        Symbol::Rule(r) => write!(f, " {}", self.rule_name(*r))?,
                        Symbol::Token(t) => write!(f, " {}", self.pp_token(*t))?,
                    }
                }
                if let Some(t) = prod.precedence_override {
                    write!(f, " %prec {}", self.pp_token(t))?;
                }
            }
            writeln!(f, "\n    ;")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------------------------
// Lexing of grammar files

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Directive(String),
    Colon,
    Pipe,
    Semi,
    Sep,
    Action,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct GrmLexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> GrmLexer<'a> {
    fn err(&self, msg: impl Into<String>) -> GrammarError {
        GrammarError {
            kind: GrammarErrorKind::Syntax(msg.into()),
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) -> Result<(), GrammarError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err("unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    /// Skips a balanced `{...}` block, stepping over string and character literals.
    fn skip_action(&mut self) -> Result<(), GrammarError> {
        let (line, col) = (self.line, self.col);
        let mut depth = 0usize;
        while let Some(c) = self.bump() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                '"' | '\'' => {
                    while let Some(d) = self.bump() {
                        if d == '\\' {
                            self.bump();
                        } else if d == c || d == '\n' {
                            break;
                        }
                    }
                }
                _ => (),
            }
        }
        Err(GrammarError {
            kind: GrammarErrorKind::Syntax("unterminated action block".into()),
            line,
            col,
        })
    }

    fn next(&mut self) -> Result<Option<Spanned>, GrammarError> {
        self.skip_ws()?;
        let (line, col) = (self.line, self.col);
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(None),
        };
        let tok = match c {
            ':' => {
                self.bump();
                Tok::Colon
            }
            '|' => {
                self.bump();
                Tok::Pipe
            }
            ';' => {
                self.bump();
                Tok::Semi
            }
            '{' => {
                self.skip_action()?;
                Tok::Action
            }
            '%' => {
                self.bump();
                match self.peek() {
                    Some('%') => {
                        self.bump();
                        Tok::Sep
                    }
                    Some('{') => {
                        // A `%{ ... %}` prologue: skipped like an action.
                        self.bump();
                        loop {
                            match (self.peek(), self.peek2()) {
                                (Some('%'), Some('}')) => {
                                    self.bump();
                                    self.bump();
                                    break;
                                }
                                (Some(_), _) => {
                                    self.bump();
                                }
                                (None, _) => return Err(self.err("unterminated %{ block")),
                            }
                        }
                        Tok::Action
                    }
                    _ => {
                        let name = self.ident();
                        if name.is_empty() {
                            return Err(self.err("expected a directive name after '%'"));
                        }
                        Tok::Directive(name)
                    }
                }
            }
            '\'' | '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('\\') => match self.bump() {
                            Some(e) => s.push(e),
                            None => return Err(self.err("unterminated literal")),
                        },
                        Some(d) if d == c => break,
                        Some('\n') | None => return Err(self.err("unterminated literal")),
                        Some(d) => s.push(d),
                    }
                }
                if s.is_empty() {
                    return Err(GrammarError {
                        kind: GrammarErrorKind::Syntax("empty token literal".into()),
                        line,
                        col,
                    });
                }
                Tok::Quoted(s)
            }
            c if c.is_alphabetic() || c == '_' => Tok::Ident(self.ident()),
            c => return Err(self.err(format!("unexpected character '{}'", c))),
        };
        Ok(Some(Spanned { tok, line, col }))
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '.' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, GrammarError> {
    let mut lx = GrmLexer {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    let mut seps = 0;
    while let Some(t) = lx.next()? {
        if t.tok == Tok::Sep {
            seps += 1;
            if seps == 2 {
                // The epilogue is never interpreted.
                break;
            }
        }
        out.push(t);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug)]
enum RawSym {
    Name(String, usize, usize),
    Lit(String),
}

/// A symbol with the line and column it appeared at.
type Located = (RawSym, usize, usize);

struct RawProd {
    syms: Vec<RawSym>,
    prec: Option<Located>,
}

struct RawRule {
    name: String,
    line: usize,
    col: usize,
    prods: Vec<RawProd>,
}

#[derive(Default)]
struct Builder {
    tokens: Vec<TokenInfo>,
    token_ix: HashMap<String, TokenId>,
    errors: Vec<GrammarError>,
}

impl Builder {
    fn token(&mut self, name: &str, literal: bool) -> TokenId {
        if let Some(t) = self.token_ix.get(name) {
            return *t;
        }
        let t = TokenId(self.tokens.len() as u32);
        self.tokens.push(TokenInfo {
            name: name.to_owned(),
            literal,
        });
        self.token_ix.insert(name.to_owned(), t);
        t
    }

    fn error(&mut self, kind: GrammarErrorKind, line: usize, col: usize) {
        self.errors.push(GrammarError { kind, line, col });
    }
}

/// Parses and validates a grammar. On failure, every violation found is returned.
pub fn parse_grammar(src: &str) -> Result<Grammar, GrammarErrors> {
    let toks = tokenize(src).map_err(|e| GrammarErrors(vec![e]))?;
    let mut b = Builder::default();
    let mut i = 0;
    let mut start: Option<(String, usize, usize)> = None;
    let mut prec_raw: Vec<(Assoc, Vec<Located>)> = Vec::new();
    let mut avoid_raw: Vec<Located> = Vec::new();

    let syntax = |t: &Spanned, msg: &str| {
        GrammarErrors(vec![GrammarError {
            kind: GrammarErrorKind::Syntax(msg.to_owned()),
            line: t.line,
            col: t.col,
        }])
    };

    // Declarations.
    while i < toks.len() && toks[i].tok != Tok::Sep {
        let t = &toks[i];
        i += 1;
        let dir = match &t.tok {
            Tok::Directive(d) => d.clone(),
            Tok::Action => continue,
            _ => return Err(syntax(t, "expected a declaration")),
        };
        // Gather the directive's arguments: identifiers and quoted literals.
        let mut args = Vec::new();
        while i < toks.len() {
            match &toks[i].tok {
                Tok::Ident(s) => args.push((
                    RawSym::Name(s.clone(), toks[i].line, toks[i].col),
                    toks[i].line,
                    toks[i].col,
                )),
                Tok::Quoted(s) => args.push((RawSym::Lit(s.clone()), toks[i].line, toks[i].col)),
                _ => break,
            }
            i += 1;
        }
        match dir.as_str() {
            "start" => {
                if args.len() != 1 {
                    return Err(syntax(t, "%start takes exactly one rule name"));
                }
                match &args[0].0 {
                    RawSym::Name(n, l, c) => start = Some((n.clone(), *l, *c)),
                    RawSym::Lit(_) => return Err(syntax(t, "%start takes a rule name")),
                }
            }
            "token" => {
                if args.is_empty() {
                    return Err(syntax(t, "%token needs at least one token"));
                }
                for (s, _, _) in args {
                    match s {
                        RawSym::Name(n, _, _) => b.token(&n, false),
                        RawSym::Lit(n) => b.token(&n, true),
                    };
                }
            }
            "left" | "right" | "nonassoc" => {
                if args.is_empty() {
                    return Err(syntax(t, "precedence declarations need at least one token"));
                }
                let assoc = match dir.as_str() {
                    "left" => Assoc::Left,
                    "right" => Assoc::Right,
                    _ => Assoc::NonAssoc,
                };
                // Precedence declarations also declare their tokens.
                for (s, _, _) in &args {
                    match s {
                        RawSym::Name(n, _, _) => b.token(n, false),
                        RawSym::Lit(n) => b.token(n, true),
                    };
                }
                prec_raw.push((assoc, args));
            }
            "avoid_insert" => {
                if args.is_empty() {
                    return Err(syntax(t, "%avoid_insert needs at least one token"));
                }
                avoid_raw.extend(args);
            }
            "union" => b.error(GrammarErrorKind::Union, t.line, t.col),
            other => b.error(
                GrammarErrorKind::UnknownDirective(other.to_owned()),
                t.line,
                t.col,
            ),
        }
    }
    if i < toks.len() {
        i += 1; // %%
    }

    // Rules.
    let mut raw_rules: Vec<RawRule> = Vec::new();
    while i < toks.len() {
        let t = &toks[i];
        let name = match &t.tok {
            Tok::Ident(n) => n.clone(),
            Tok::Sep => break,
            _ => return Err(syntax(t, "expected a rule name")),
        };
        i += 1;
        match toks.get(i) {
            Some(Spanned {
                tok: Tok::Colon, ..
            }) => i += 1,
            Some(x) => return Err(syntax(x, "expected ':' after rule name")),
            None => return Err(syntax(t, "expected ':' after rule name")),
        }
        let mut prods = vec![RawProd {
            syms: Vec::new(),
            prec: None,
        }];
        loop {
            let x = match toks.get(i) {
                Some(x) => x,
                None => return Err(syntax(t, "rule is missing its terminating ';'")),
            };
            i += 1;
            let cur = prods.last_mut().unwrap();
            match &x.tok {
                Tok::Ident(n) => cur.syms.push(RawSym::Name(n.clone(), x.line, x.col)),
                Tok::Quoted(n) => {
                    b.token(n, true);
                    cur.syms.push(RawSym::Lit(n.clone()));
                }
                Tok::Action => (),
                Tok::Pipe => prods.push(RawProd {
                    syms: Vec::new(),
                    prec: None,
                }),
                Tok::Semi => break,
                Tok::Directive(d) if d == "prec" => {
                    let p = match toks.get(i) {
                        Some(Spanned {
                            tok: Tok::Ident(n),
                            line,
                            col,
                        }) => (RawSym::Name(n.clone(), *line, *col), *line, *col),
                        Some(Spanned {
                            tok: Tok::Quoted(n),
                            line,
                            col,
                        }) => (RawSym::Lit(n.clone()), *line, *col),
                        _ => return Err(syntax(x, "%prec needs a token")),
                    };
                    i += 1;
                    cur.prec = Some(p);
                }
                Tok::Directive(d) if d == "empty" => (),
                _ => return Err(syntax(x, "unexpected symbol in production")),
            }
        }
        raw_rules.push(RawRule {
            name,
            line: t.line,
            col: t.col,
            prods,
        });
    }

    // Resolve rules.
    let mut rule_ix: HashMap<String, RuleId> = HashMap::new();
    let mut rules: Vec<Rule> = Vec::new();
    for rr in &raw_rules {
        if rule_ix.contains_key(&rr.name) {
            b.error(
                GrammarErrorKind::DuplicateRule(rr.name.clone()),
                rr.line,
                rr.col,
            );
            continue;
        }
        if b.token_ix.contains_key(&rr.name) {
            b.error(
                GrammarErrorKind::TokenRuleClash(rr.name.clone()),
                rr.line,
                rr.col,
            );
        }
        rule_ix.insert(rr.name.clone(), RuleId(rules.len() as u32));
        rules.push(Rule {
            name: rr.name.clone(),
            prods: Vec::new(),
        });
    }

    let resolve_token = |b: &mut Builder, s: &RawSym, line: usize, col: usize| -> Option<TokenId> {
        match s {
            RawSym::Lit(n) => Some(b.token(n, true)),
            RawSym::Name(n, _, _) => match b.token_ix.get(n) {
                Some(t) => Some(*t),
                None => {
                    let kind = if rule_ix.contains_key(n) {
                        GrammarErrorKind::NotAToken(n.clone())
                    } else {
                        GrammarErrorKind::UnknownSymbol(n.clone())
                    };
                    b.error(kind, line, col);
                    None
                }
            },
        }
    };

    let mut prods: Vec<Production> = Vec::new();
    let mut seen_rules = std::collections::HashSet::new();
    for rr in &raw_rules {
        if !seen_rules.insert(rr.name.clone()) {
            continue;
        }
        let rid = rule_ix[&rr.name];
        for rp in &rr.prods {
            let mut symbols = Vec::with_capacity(rp.syms.len());
            for s in &rp.syms {
                match s {
                    RawSym::Lit(n) => {
                        if n == EOF_NAME {
                            b.error(GrammarErrorKind::EofReferenced, rr.line, rr.col);
                        }
                        symbols.push(Symbol::Token(b.token(n, true)));
                    }
                    RawSym::Name(n, l, c) => {
                        if let Some(r) = rule_ix.get(n) {
                            symbols.push(Symbol::Rule(*r));
                        } else if let Some(t) = b.token_ix.get(n) {
                            symbols.push(Symbol::Token(*t));
                        } else {
                            b.error(GrammarErrorKind::UnknownSymbol(n.clone()), *l, *c);
                        }
                    }
                }
            }
            let precedence_override = match &rp.prec {
                Some((s, l, c)) => resolve_token(&mut b, s, *l, *c),
                None => None,
            };
            let pid = ProdId(prods.len() as u32);
            rules[rid.index()].prods.push(pid);
            prods.push(Production {
                rule: rid,
                symbols,
                precedence_override,
            });
        }
    }

    let start = match start {
        Some((n, l, c)) => match rule_ix.get(&n) {
            Some(r) => Some(*r),
            None => {
                b.error(GrammarErrorKind::UnknownStartRule(n), l, c);
                None
            }
        },
        None if rules.is_empty() => {
            b.error(GrammarErrorKind::NoStartRule, 1, 1);
            None
        }
        // Yacc's convention: the first rule is the start rule.
        None => Some(RuleId(0)),
    };

    let mut avoid_insert = BTreeSet::new();
    for (s, l, c) in &avoid_raw {
        if let Some(t) = resolve_token(&mut b, s, *l, *c) {
            avoid_insert.insert(t);
        }
    }

    let mut prec_decls = Vec::new();
    for (assoc, args) in &prec_raw {
        let mut ts = Vec::new();
        for (s, l, c) in args {
            if let Some(t) = resolve_token(&mut b, s, *l, *c) {
                ts.push(t);
            }
        }
        prec_decls.push(PrecedenceDecl {
            assoc: *assoc,
            tokens: ts,
        });
    }

    if b.token_ix.contains_key(EOF_NAME) {
        b.error(GrammarErrorKind::EofReferenced, 1, 1);
    }

    if !b.errors.is_empty() {
        return Err(GrammarErrors(b.errors));
    }
    let start = start.expect("start rule resolved when there are no errors");

    let mut tokens = b.tokens;
    tokens.push(TokenInfo {
        name: EOF_NAME.to_owned(),
        literal: false,
    });
    let mut token_prec = vec![None; tokens.len()];
    for (level, d) in prec_decls.iter().enumerate() {
        for t in &d.tokens {
            token_prec[t.index()] = Some(Precedence {
                level: level as u32 + 1,
                assoc: d.assoc,
            });
        }
    }

    Ok(Grammar {
        tokens,
        rules,
        prods,
        start,
        avoid_insert,
        token_prec,
        prec_decls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CALC: &str = "
        %start Expr
        %%
        Expr: Term '+' Expr | Term ;
        Term: Factor '*' Term | Factor ;
        Factor: '(' Expr ')' | 'INT' ;
    ";

    #[test]
    fn calc_grammar() {
        let g = parse_grammar(CALC).unwrap();
        assert_eq!(g.rules_len(), 3);
        assert_eq!(g.prods_len(), 6);
        assert_eq!(g.rule_name(g.start_rule()), "Expr");
        // '+', '*', '(', ')', INT and EOF.
        assert_eq!(g.tokens_len(), 6);
        assert_eq!(g.token_name(g.eof()), "$");
        // Production IV is `Term: Factor`.
        let iv = g.prod(ProdId(3));
        assert_eq!(g.rule_name(iv.rule), "Term");
        assert_eq!(iv.symbols, vec![Symbol::Rule(g.rule_id("Factor").unwrap())]);
    }

    #[test]
    fn epsilon_rule() {
        let g = parse_grammar("%%\nS: ;").unwrap();
        assert_eq!(g.rules_len(), 1);
        assert_eq!(g.prods_len(), 1);
        assert!(g.prod(ProdId(0)).symbols.is_empty());
        assert_eq!(g.tokens_len(), 1);
    }

    #[test]
    fn undeclared_token() {
        let e = parse_grammar("%%\nS: 'a' FOO ;").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].kind, GrammarErrorKind::UnknownSymbol("FOO".into()));
        assert_eq!((e.0[0].line, e.0[0].col), (2, 8));
    }

    #[test]
    fn every_violation_is_reported() {
        let e = parse_grammar("%start T\n%%\nS: A ;\nS: B ;").unwrap_err();
        let kinds: Vec<_> = e.0.iter().map(|e| e.kind.clone()).collect();
        assert!(kinds.contains(&GrammarErrorKind::UnknownSymbol("A".into())));
        assert!(kinds.contains(&GrammarErrorKind::DuplicateRule("S".into())));
        assert!(kinds.contains(&GrammarErrorKind::UnknownStartRule("T".into())));
    }

    #[test]
    fn missing_start() {
        let e = parse_grammar("%token A\n%%\n").unwrap_err();
        assert_eq!(e.0[0].kind, GrammarErrorKind::NoStartRule);
    }

    #[test]
    fn union_and_unknown_directives() {
        let e = parse_grammar("%union\n%frob\n%%\nS: ;").unwrap_err();
        assert_eq!(e.0[0].kind, GrammarErrorKind::Union);
        assert_eq!(
            e.0[1].kind,
            GrammarErrorKind::UnknownDirective("frob".into())
        );
    }

    #[test]
    fn syntax_error_position() {
        let e = parse_grammar("%%\nS: 'a'\n").unwrap_err();
        assert!(matches!(e.0[0].kind, GrammarErrorKind::Syntax(_)));
    }

    #[test]
    fn actions_are_skipped() {
        let g = parse_grammar(
            "%%\nS: 'a' { if x { \"}\" } else { '}' } } | 'b' %prec 'a' { $$ = 1; } ;\n%%\nfn main() {",
        )
        .unwrap();
        assert_eq!(g.prods_len(), 2);
        assert_eq!(g.prod(ProdId(1)).precedence_override, g.token_id("a"));
    }

    #[test]
    fn avoid_insert_many_per_line() {
        let g = parse_grammar("%avoid_insert \"INT\" ID\n%token ID\n%%\nS: 'INT' ID ;").unwrap();
        let names: Vec<_> = g.avoid_insert().iter().map(|t| g.token_name(*t)).collect();
        assert_eq!(names.len(), 2);
        assert!(names.contains(&"INT") && names.contains(&"ID"));
    }

    #[test]
    fn precedence() {
        let g =
            parse_grammar("%left '+' '-'\n%right '^'\n%%\nE: E '+' E | E '^' E | 'n' ;").unwrap();
        let plus = g.token_precedence(g.token_id("+").unwrap()).unwrap();
        let pow = g.token_precedence(g.token_id("^").unwrap()).unwrap();
        assert!(plus.level < pow.level);
        assert_eq!(pow.assoc, Assoc::Right);
        assert_eq!(g.prod_precedence(ProdId(0)), Some(plus));
        assert_eq!(g.prod_precedence(ProdId(2)), None);
    }

    #[test]
    fn eof_cannot_be_referenced() {
        let e = parse_grammar("%%\nS: '$' ;").unwrap_err();
        assert_eq!(e.0[0].kind, GrammarErrorKind::EofReferenced);
    }

    #[test]
    fn pretty_print_round_trip() {
        for src in [
            CALC,
            "%%\nS: ;",
            "%left '+'\n%avoid_insert 'n'\n%%\nE: E '+' E %prec '+' | 'n' | ;",
            "%token ID \"it's\"\n%%\nA: ID B | \"it's\" ; B: A ';' | ;",
        ] {
            let g = parse_grammar(src).unwrap();
            let printed = g.to_string();
            let g2 = parse_grammar(&printed).unwrap();
            assert_eq!(g, g2, "{}", printed);
        }
    }

    #[test]
    fn parse_is_pure() {
        assert_eq!(parse_grammar(CALC).unwrap(), parse_grammar(CALC).unwrap());
    }
}
