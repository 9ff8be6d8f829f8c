//! Compare the three shift rules on `2 3 +`. The simplest rule finds nothing because it
//! cannot perform the reductions needed to reach accept after the last repair.

use std::time::{Duration, Instant};

use lrrepair::cactus::Bump;
use lrrepair::fixtures;
use lrrepair::parser::first_error;
use lrrepair::recovery::{cpctplus, render_sequence, RecoveryParams, ShiftRule};

fn main() {
    let lang = fixtures::calc();
    let src = "2 3 +";
    let toks = lang.lex(src).unwrap();
    let (stack, i) = first_error(&lang.table, &toks).unwrap();
    for rule in [ShiftRule::Shift1, ShiftRule::Shift2, ShiftRule::Shift3] {
        let params = RecoveryParams {
            shift_rule: rule,
            max_cost: Some(4),
            ..lang.params()
        };
        let arena = Bump::new();
        let deadline = Instant::now() + Duration::from_secs(1);
        println!("{:?}:", rule);
        match cpctplus::search(&arena, &lang.table, &stack.0, &toks, i, &params, deadline) {
            Ok(r) => {
                println!(
                    "  cost {}, {} success configurations",
                    r.cost,
                    r.successes.len()
                );
                for s in r.sequences() {
                    println!("  {}", render_sequence(&lang.grammar, src, &toks, i, &s));
                }
            }
            Err(e) => println!("  {}", e),
        }
    }
}
