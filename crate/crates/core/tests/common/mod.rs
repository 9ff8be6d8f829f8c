#![allow(dead_code)]

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use lrrepair::cactus::Bump;
use lrrepair::lexer::Token;
use lrrepair::parser::first_error;
use lrrepair::recovery::{cpctplus, render_sequence, RecoveryParams, Repair};
use lrrepair::Language;

/// Lexes `src` and parses it up to the first error.
pub fn at_error(
    lang: &Language,
    src: &str,
) -> (Vec<Token>, Vec<lrrepair::lrtable::StateId>, usize) {
    let toks = lang.lex(src).unwrap();
    let (stack, i) = first_error(&lang.table, &toks).expect("input should contain an error");
    (toks, stack.0, i)
}

pub fn far_deadline() -> Instant {
    Instant::now() + Duration::from_secs(60)
}

/// The pre-ranking sequence set, rendered.
pub fn search_rendered(lang: &Language, src: &str, params: &RecoveryParams) -> BTreeSet<String> {
    let (toks, stack, i) = at_error(lang, src);
    let arena = Bump::new();
    match cpctplus::search(
        &arena,
        &lang.table,
        &stack,
        &toks,
        i,
        params,
        far_deadline(),
    ) {
        Ok(r) => render_all(lang, src, &toks, i, r.sequences().iter()),
        Err(_) => BTreeSet::new(),
    }
}

pub fn render_all<'a, I>(
    lang: &Language,
    src: &str,
    toks: &[Token],
    i: usize,
    seqs: I,
) -> BTreeSet<String>
where
    I: Iterator<Item = &'a Vec<Repair>>,
{
    seqs.map(|s| render_sequence(&lang.grammar, src, toks, i, s))
        .collect()
}

pub fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}
