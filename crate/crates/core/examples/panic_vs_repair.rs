//! Run panic mode and minimum cost repair over the same broken input and compare how many
//! errors each reports.

use lrrepair::fixtures;
use lrrepair::recovery::{render_sequence, RecovererKind, ReportKind};

fn main() {
    let lang = fixtures::stmts();
    let src = "a = ( 1 + ; b = 2 ; c = c + + 3 ;";
    let toks = lang.lex(src).unwrap();
    for kind in [RecovererKind::Panic, RecovererKind::CPCTPlus] {
        let res = lang.parse_tokens(&toks, kind, lang.params());
        println!("{} ({} error locations):", kind, res.stats.error_locations);
        for r in &res.reports {
            let (line, col) = r.line_col(src);
            match &r.kind {
                ReportKind::Panic { popped, skipped } => {
                    println!(
                        "  {}:{} popped {} states, skipped {} tokens",
                        line, col, popped, skipped
                    )
                }
                ReportKind::Repairs {
                    sequences, cost, ..
                } => println!(
                    "  {}:{} cost {}: {}",
                    line,
                    col,
                    cost,
                    render_sequence(&lang.grammar, src, &toks, r.token_index, &sequences[0])
                ),
                ReportKind::Failed => println!("  {}:{} failed", line, col),
            }
        }
    }
}
