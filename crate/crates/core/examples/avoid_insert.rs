//! `%avoid_insert` moves repairs that insert the named tokens to the end of the ranking. Here
//! inserting `+` between two numbers drops from second place to last.

use lrrepair::fixtures;
use lrrepair::recovery::{render_sequence, RecovererKind};
use lrrepair::Language;

fn main() {
    let src = "2 3";
    let plain = fixtures::calc();
    let avoiding = Language::new(
        &fixtures::CALC_Y.replacen("%%", "%avoid_insert '+'\n%%", 1),
        fixtures::CALC_L,
    )
    .unwrap();
    for (name, lang) in [("plain", &plain), ("avoid_insert +", &avoiding)] {
        let mut params = lang.params();
        params.deterministic_order = true;
        let toks = lang.lex(src).unwrap();
        let res = lang.parse_tokens(&toks, RecovererKind::CPCTPlus, params);
        let r = &res.reports[0];
        println!("{}:", name);
        for (i, s) in r.sequences().iter().enumerate() {
            println!(
                "  {}: {}",
                i + 1,
                render_sequence(&lang.grammar, src, &toks, r.token_index, s)
            );
        }
    }
}
