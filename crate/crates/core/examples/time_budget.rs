//! Recovery gives up once the per-file time budget is spent. Many unmatched brackets make
//! the search space explode, so this input fails at the default 500ms.

use std::time::Instant;

use lrrepair::fixtures;
use lrrepair::recovery::RecovererKind;

fn main() {
    let lang = fixtures::exprs();
    for n in [2, 4, 6, 8] {
        let src = format!("f {} ;", "( ".repeat(n));
        let toks = lang.lex(&src).unwrap();
        let t = Instant::now();
        let res = lang.parse_tokens(&toks, RecovererKind::CPCTPlus, lang.params());
        let cost = res
            .stats
            .costs
            .first()
            .map_or("-".to_owned(), |c| c.to_string());
        println!(
            "{} open brackets: {:<9} cost {:<2} {:?}",
            n,
            if res.recovery_succeeded {
                "repaired"
            } else {
                "failed"
            },
            cost,
            t.elapsed()
        );
    }
}
