//! Cross-check the repair search against exhaustive enumeration on one input.

use std::time::{Duration, Instant};

use lrrepair::cactus::Bump;
use lrrepair::fixtures;
use lrrepair::parser::first_error;
use lrrepair::recovery::{cpctplus, oracle, render_sequence};

fn main() {
    let lang = fixtures::brackets();
    let src = "( [ x ) ]";
    let toks = lang.lex(src).unwrap();
    let (stack, i) = first_error(&lang.table, &toks).unwrap();
    let params = lang.params();

    let arena = Bump::new();
    let fast = cpctplus::search(
        &arena,
        &lang.table,
        &stack.0,
        &toks,
        i,
        &params,
        Instant::now() + Duration::from_secs(5),
    )
    .unwrap();
    let (cost, slow) =
        oracle::min_repairs(&lang.table, &stack.0, &toks, i, params.n_shifts, 4).unwrap();
    println!("search: cost {}, oracle: cost {}", fast.cost, cost);
    for s in &slow {
        println!("  {}", render_sequence(&lang.grammar, src, &toks, i, s));
    }
    println!("sets equal: {}", fast.sequences() == slow);
}
