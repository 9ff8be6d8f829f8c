//! Build canonical and merged LR(1) state graphs for a grammar and report conflicts.
//!
//! cargo run --example stategraph -- path/to/grammar.y

use lrrepair::fixtures;
use lrrepair::grammar::parse_grammar;
use lrrepair::lrtable::{build_stategraph, build_statetable, Conflict};

fn main() {
    let src = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p).expect("cannot read grammar"),
        None => fixtures::CALC_Y.to_owned(),
    };
    let grm = match parse_grammar(&src) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{}", e);
            std::process::exit(2);
        }
    };
    let canonical = build_stategraph(&grm, false);
    let merged = build_stategraph(&grm, true);
    println!(
        "canonical: {} states, merged: {} states",
        canonical.states_len(),
        merged.states_len()
    );
    print!("{}", merged.pp(&grm));

    let table = build_statetable(&merged, &grm);
    for c in &table.conflicts {
        match c {
            Conflict::ShiftReduce { state, token, prod } => println!(
                "shift/reduce in state {} on {}: shifted instead of reducing {}",
                state.0,
                grm.token_name(*token),
                grm.rule_name(grm.prod(*prod).rule)
            ),
            Conflict::ReduceReduce {
                state,
                token,
                kept,
                dropped,
            } => println!(
                "reduce/reduce in state {} on {}: kept production {}, dropped {}",
                state.0,
                grm.token_name(*token),
                kept.index(),
                dropped.index()
            ),
        }
    }
}
