//! Parse an arithmetic expression and print its tree. The input is missing an operand, so
//! the tree contains an inserted token.
//!
//! cargo run --example parse_tree -- "2 * (3 +"

use lrrepair::fixtures;
use lrrepair::recovery::{render_sequence, RecovererKind};

fn main() {
    let src = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "2 * (3 +".to_owned());
    let lang = fixtures::calc();
    let toks = match lang.lex(&src) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot lex input at byte {}", e.offset);
            std::process::exit(2);
        }
    };
    let res = lang.parse_tokens(&toks, RecovererKind::CPCTPlus, lang.params());
    for r in &res.reports {
        let (line, col) = r.line_col(&src);
        let applied = r
            .applied()
            .map(|s| render_sequence(&lang.grammar, &src, &toks, r.token_index, s));
        println!(
            "error at {}:{}, applied {:?}",
            line,
            col,
            applied.unwrap_or_default()
        );
    }
    match res.tree {
        Some(t) => print!("{}", t.pp(&lang.grammar, &src)),
        None => println!("no tree: recovery failed"),
    }
}
