//! Generate programs, break them with random edits, and compare recoverers on the result.
//! Writes per-run CSV to the path given as the first argument, if any.

use std::collections::BTreeMap;
use std::fs::File;

use lrrepair::bench::{
    bootstrap, generate_programs, mutate_corpus, run_corpus, summarize, summary_table, write_csv,
    BenchConfig,
};
use lrrepair::fixtures;
use lrrepair::recovery::RecovererKind;

fn main() {
    let lang = fixtures::stmts();
    let mut lexemes = BTreeMap::new();
    lexemes.insert(
        "ID".to_owned(),
        vec!["a".to_owned(), "b".to_owned(), "x".to_owned()],
    );
    lexemes.insert("INT".to_owned(), vec!["1".to_owned(), "42".to_owned()]);
    let programs = generate_programs(&lang.grammar, &lexemes, 1, 200, 10, 20);
    let corpus = mutate_corpus(&programs, &lang, 0, 3);
    println!("e.g. {:?}\n", corpus[0].src);

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for kind in [
        RecovererKind::Panic,
        RecovererKind::CPCTPlus,
        RecovererKind::CPCTPlusRev,
    ] {
        let mut cfg = BenchConfig::new(kind, lang.params());
        cfg.repeats = 3;
        let run = run_corpus(&lang, &corpus, &cfg);
        let ci = bootstrap(&run.records, 1000, 0.99, 0).unwrap();
        summaries.push((kind.to_string(), summarize(&run.records), ci));
        records.extend(run.records);
    }
    let rows: Vec<(&str, _)> = summaries.iter().map(|(n, s, _)| (n.as_str(), s)).collect();
    print!("{}", summary_table(&rows));
    for (name, _, ci) in &summaries {
        println!(
            "{:<14} 99% CI error locations [{:.1}, {:.1}], mean time [{:.6}, {:.6}]",
            name, ci.error_locations.lo, ci.error_locations.hi, ci.mean_time.lo, ci.mean_time.hi
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        write_csv(&records, File::create(&path).unwrap()).unwrap();
        println!("wrote {} rows to {}", records.len(), path);
    }
}
