//! End-to-end acceptance checks. Runs without the default test harness so that every
//! criterion prints exactly one PASS or FAIL line, even when an earlier one fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lrrepair::bench::{
    bootstrap, generate_programs, mutate_corpus, run_corpus, summarize, BenchConfig, Record,
};
use lrrepair::cactus::Bump;
use lrrepair::cli::run_cli;
use lrrepair::fixtures;
use lrrepair::grammar::TokenId;
use lrrepair::lexer::{Span, Token};
use lrrepair::lrtable::{build_stategraph, build_statetable, StateId, StateTable};
use lrrepair::parser::{first_error, lr_step, ParseStack, Step};
use lrrepair::recovery::{
    cpctplus, oracle, panic as panic_mode, RecovererKind, RecoveryParams, Repair, ShiftRule,
};
use lrrepair::Language;

use common::{at_error, far_deadline, search_rendered, set};

// Tolerances.
const FIG9_MAX_RUNTIME: Duration = Duration::from_secs(1);
const ORACLE_MAX_LEN: usize = 5;
const ORACLE_MAX_COST: u32 = 4;
const ORACLE_MAX_RUNTIME: Duration = Duration::from_secs(300);
const TABLE_MAX_LEN: usize = 8;
const TIMEOUT: Duration = Duration::from_millis(500);
const TIMEOUT_SLACK: Duration = Duration::from_millis(50);
const TIMEOUT_BRACKETS: usize = 8;
const TIMEOUT_MAX_RSS_KB: u64 = 2 * 1024 * 1024;
const H2_FILES: usize = 500;
const H2_EDITS: usize = 2;
const H2_SEED: u64 = 0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("shift rule variants on \"2 3 +\"", c1_shift_rules),
        ("panic mode trace on \"2 + + 3\"", c2_panic_trace),
        ("ranking and avoid_insert on calc", c3_ranking),
        ("search agrees with brute force", c4_oracle),
        ("merging does not change results", c5_merging),
        ("canonical and merged tables agree", c6_tables),
        ("recovery respects its time budget", c7_timeout),
        ("reverse ranking causes more cascades", c8_h2),
        ("command line report", c9_cli),
        ("benchmark accounting", c10_bench),
    ];
    panic::set_hook(Box::new(|_| ()));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {}", msg))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!(
                "criterion {:>2} {:<40} PASS ({:.2}s) {}",
                i + 1,
                name,
                secs,
                detail
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} {:<40} FAIL ({:.2}s) {}",
                    i + 1,
                    name,
                    secs,
                    detail
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn c1_shift_rules() -> Outcome {
    let lang = fixtures::calc();
    let shift2 = set(&[
        "Delete 3, Delete +",
        "Delete 3, Shift +, Insert INT",
        "Insert +, Shift 3, Shift +, Insert INT",
        "Insert *, Shift 3, Shift +, Insert INT",
    ]);
    let mut shift3 = shift2.clone();
    shift3.extend(set(&[
        "Insert *, Shift 3, Delete +",
        "Insert +, Shift 3, Delete +",
    ]));

    let t = Instant::now();
    let with = |rule, max_cost| {
        let p = RecoveryParams {
            shift_rule: rule,
            max_cost,
            ..lang.params()
        };
        search_rendered(&lang, "2 3 +", &p)
    };
    let s1 = with(ShiftRule::Shift1, Some(ORACLE_MAX_COST));
    let s2 = with(ShiftRule::Shift2, None);
    let s3 = with(ShiftRule::Shift3, None);
    let elapsed = t.elapsed();
    ensure!(s1.is_empty(), "Shift1 found {:?}", s1);
    ensure!(s2 == shift2, "Shift2 found {:?}", s2);
    ensure!(s3 == shift3, "Shift3 found {:?}", s3);
    ensure!(elapsed < FIG9_MAX_RUNTIME, "took {:?}", elapsed);
    Ok(format!("0/4/6 sequences in {:?}", elapsed))
}

fn c2_panic_trace() -> Outcome {
    let lang = fixtures::calc();
    let (toks, stack, i) = at_error(&lang, "2 + + 3");
    ensure!(
        stack == [StateId(0), StateId(2), StateId(7)],
        "error stack {:?}",
        stack
    );
    ensure!(i == 2, "error at token {}", i);
    let r = panic_mode::recover(&lang.table, &stack, &toks, i).ok_or("panic mode failed")?;
    ensure!(r.stack_len == 2 && r.offset == i, "resumed with {:?}", r);
    Ok("stack [0, 2, 7] -> [0, 2], nothing skipped".into())
}

fn c3_ranking() -> Outcome {
    let lang = fixtures::calc();
    let int = lang.grammar.token_id("INT").unwrap();
    let p = RecoveryParams {
        deterministic_order: true,
        ..lang.params()
    };
    let ranked = |lang: &Language, src: &str, p: &RecoveryParams| {
        let (toks, stack, i) = at_error(lang, src);
        cpctplus::recover(&lang.table, &stack, &toks, i, p, far_deadline(), false).map(|r| r.0)
    };
    let a = ranked(&lang, "2 +", &p).map_err(|e| e.to_string())?;
    ensure!(a == [vec![Repair::Insert(int)]], "\"2 +\" gave {:?}", a);
    let b: BTreeSet<_> = ranked(&lang, "2 + + 3", &p)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    ensure!(
        b == BTreeSet::from([vec![Repair::Delete], vec![Repair::Insert(int)]]),
        "\"2 + + 3\" gave {:?}",
        b
    );

    let avoiding = Language::new(
        &fixtures::CALC_Y.replacen("%%", "%avoid_insert 'INT'\n%%", 1),
        fixtures::CALC_L,
    )
    .map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let src = "2 + + 3";
        let r = avoiding.parse_tokens(
            &avoiding.lex(src).unwrap(),
            RecovererKind::CPCTPlus,
            avoiding.params(),
        );
        ensure!(r.reports.len() == 1, "{} reports", r.reports.len());
        let seqs = r.reports[0].sequences();
        ensure!(
            seqs == [vec![Repair::Delete], vec![Repair::Insert(int)]],
            "avoid_insert ranking {:?}",
            seqs
        );
        ensure!(
            r.reports[0].applied() == Some(&[Repair::Delete][..]),
            "applied {:?}",
            r.reports[0].applied()
        );
    }
    Ok("[Insert INT]; {[Delete +], [Insert INT]}; avoid_insert applies Delete".into())
}

fn alphabet(lang: &Language) -> Vec<TokenId> {
    lang.grammar
        .token_ids()
        .filter(|t| *t != lang.grammar.eof())
        .collect()
}

fn tokens(lang: &Language, kinds: &[TokenId]) -> Vec<Token> {
    let mut v: Vec<Token> = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| Token::real(*k, Span::new(2 * i, 2 * i + 1)))
        .collect();
    let end = 2 * kinds.len();
    v.push(Token::real(lang.grammar.eof(), Span::new(end, end)));
    v
}

/// Calls `f` with every string over `alpha` of length at most `max_len`.
fn for_each_string(alpha: &[TokenId], max_len: usize, f: &mut dyn FnMut(&[TokenId])) {
    let mut s = Vec::new();
    fn go(alpha: &[TokenId], max_len: usize, s: &mut Vec<TokenId>, f: &mut dyn FnMut(&[TokenId])) {
        f(s);
        if s.len() == max_len {
            return;
        }
        for &t in alpha {
            s.push(t);
            go(alpha, max_len, s, f);
            s.pop();
        }
    }
    go(alpha, max_len, &mut s, f);
}

struct OracleTally {
    strings: usize,
    errors: usize,
    beyond: usize,
    mismatches: Vec<String>,
}

fn compare_with_oracle(lang: &Language, merge: bool) -> OracleTally {
    let params = RecoveryParams {
        merge_configurations: merge,
        ..lang.params()
    };
    let mut tally = OracleTally {
        strings: 0,
        errors: 0,
        beyond: 0,
        mismatches: Vec::new(),
    };
    for_each_string(&alphabet(lang), ORACLE_MAX_LEN, &mut |kinds| {
        tally.strings += 1;
        let toks = tokens(lang, kinds);
        let Some((stack, i)) = first_error(&lang.table, &toks) else {
            return;
        };
        tally.errors += 1;
        let arena = Bump::new();
        let got = cpctplus::search(
            &arena,
            &lang.table,
            &stack.0,
            &toks,
            i,
            &params,
            far_deadline(),
        );
        let want = oracle::min_repairs(
            &lang.table,
            &stack.0,
            &toks,
            i,
            params.n_shifts,
            ORACLE_MAX_COST,
        );
        let ok = match (&got, &want) {
            (Ok(g), Some((c, seqs))) => g.cost == *c && g.sequences() == *seqs,
            (Ok(g), None) => {
                tally.beyond += 1;
                g.cost > ORACLE_MAX_COST
            }
            (Err(_), _) => false,
        };
        if !ok && tally.mismatches.len() < 3 {
            let names: Vec<&str> = kinds.iter().map(|k| lang.grammar.token_name(*k)).collect();
            tally.mismatches.push(format!("{:?}", names));
        }
    });
    tally
}

fn small_fixtures() -> [(&'static str, Language); 3] {
    [
        ("calc", fixtures::calc()),
        ("stmts", fixtures::stmts()),
        ("brackets", fixtures::brackets()),
    ]
}

fn oracle_check(merge: bool, deadline: Duration) -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    for (name, lang) in small_fixtures() {
        let tally = compare_with_oracle(&lang, merge);
        ensure!(
            tally.mismatches.is_empty(),
            "{}: differs on {:?}",
            name,
            tally.mismatches
        );
        parts.push(format!(
            "{} {} strings/{} errors/{} beyond cost {}",
            name, tally.strings, tally.errors, tally.beyond, ORACLE_MAX_COST
        ));
    }
    ensure!(t.elapsed() < deadline, "took {:?}", t.elapsed());
    Ok(parts.join("; "))
}

fn c4_oracle() -> Outcome {
    oracle_check(true, ORACLE_MAX_RUNTIME)
}

fn c5_merging() -> Outcome {
    let detail = oracle_check(false, ORACLE_MAX_RUNTIME)?;
    let lang = fixtures::calc();
    let (toks, stack, i) = at_error(&lang, "2 3 +");
    let arena = Bump::new();
    let r = cpctplus::search(
        &arena,
        &lang.table,
        &stack,
        &toks,
        i,
        &lang.params(),
        far_deadline(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        r.successes.len() == 5,
        "{} success configurations",
        r.successes.len()
    );
    Ok(format!(
        "unmerged: {}; 5 merged success configurations",
        detail
    ))
}

/// Feeds `t`, returning false if it cannot be shifted.
fn feed(table: &StateTable, stack: &mut ParseStack, t: TokenId) -> bool {
    loop {
        match lr_step(table, stack, t) {
            Step::Shift => return true,
            Step::Reduce(_) => (),
            Step::Accept | Step::Error => return false,
        }
    }
}

fn accepts(table: &StateTable, stack: &ParseStack, eof: TokenId) -> bool {
    let mut st = stack.clone();
    loop {
        match lr_step(table, &mut st, eof) {
            Step::Reduce(_) => (),
            Step::Accept => return true,
            Step::Shift | Step::Error => return false,
        }
    }
}

/// Two tables driven in lockstep over every viable prefix of length at most `max_len`.
struct Lockstep<'a> {
    canonical: &'a StateTable,
    pager: &'a StateTable,
    alpha: &'a [TokenId],
    eof: TokenId,
    strings: usize,
    prefix: Vec<TokenId>,
}

impl Lockstep<'_> {
    /// Returns the first string on which the tables disagree.
    fn walk(&mut self, left: usize, stacks: (ParseStack, ParseStack)) -> Result<(), Vec<TokenId>> {
        self.strings += 1;
        if accepts(self.canonical, &stacks.0, self.eof) != accepts(self.pager, &stacks.1, self.eof)
        {
            return Err(self.prefix.clone());
        }
        if left == 0 {
            return Ok(());
        }
        for &t in self.alpha {
            let (mut a, mut b) = stacks.clone();
            let (va, vb) = (feed(self.canonical, &mut a, t), feed(self.pager, &mut b, t));
            self.prefix.push(t);
            if va != vb {
                return Err(self.prefix.clone());
            }
            if va {
                self.walk(left - 1, (a, b))?;
            } else {
                // Every extension is rejected by both; count them without walking.
                self.strings += (0..left)
                    .map(|k| self.alpha.len().pow(k as u32))
                    .sum::<usize>();
            }
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Checks every string of length at most `max_len`, returning how many there were.
fn agree(
    canonical: &StateTable,
    pager: &StateTable,
    alpha: &[TokenId],
    eof: TokenId,
    max_len: usize,
) -> Result<usize, Vec<TokenId>> {
    let mut l = Lockstep {
        canonical,
        pager,
        alpha,
        eof,
        strings: 0,
        prefix: Vec::new(),
    };
    l.walk(max_len, (ParseStack::new(), ParseStack::new()))?;
    Ok(l.strings)
}

fn c6_tables() -> Outcome {
    let all = [
        ("calc", fixtures::calc()),
        ("stmts", fixtures::stmts()),
        ("brackets", fixtures::brackets()),
        ("exprs", fixtures::exprs()),
        ("minijava", fixtures::minijava()),
    ];
    let mut parts = Vec::new();
    let mut smaller = false;
    for (name, lang) in &all {
        let g = &lang.grammar;
        let canonical = build_statetable(&build_stategraph(g, false), g);
        let pager = &lang.table;
        smaller |= pager.states_len() < canonical.states_len();
        let n = agree(&canonical, pager, &alphabet(lang), g.eof(), TABLE_MAX_LEN).map_err(|s| {
            let names: Vec<&str> = s.iter().map(|k| g.token_name(*k)).collect();
            format!("{}: tables disagree on {:?}", name, names)
        })?;
        parts.push(format!(
            "{} {}/{} states {} strings",
            name,
            pager.states_len(),
            canonical.states_len(),
            n
        ));
    }
    ensure!(
        smaller,
        "merging never reduced the state count: {}",
        parts.join("; ")
    );
    Ok(parts.join("; "))
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn c7_timeout() -> Outcome {
    let lang = fixtures::exprs();
    let src = format!("f {} ;", "( ".repeat(TIMEOUT_BRACKETS));
    let toks = lang
        .lex(&src)
        .map_err(|e| format!("lex error at {}", e.offset))?;
    let p = RecoveryParams {
        timeout: TIMEOUT,
        ..lang.params()
    };
    let t = Instant::now();
    let r = lang.parse_tokens(&toks, RecovererKind::CPCTPlus, p);
    let elapsed = t.elapsed();
    ensure!(
        !r.recovery_succeeded,
        "recovered from {} open brackets",
        TIMEOUT_BRACKETS
    );
    ensure!(elapsed < TIMEOUT + TIMEOUT_SLACK, "took {:?}", elapsed);
    let rss = peak_rss_kb();
    if let Some(kb) = rss {
        ensure!(kb < TIMEOUT_MAX_RSS_KB, "peak RSS {} kB", kb);
    }
    Ok(format!(
        "{} open brackets failed after {:?}; peak RSS {}",
        TIMEOUT_BRACKETS,
        elapsed,
        rss.map_or("unknown".into(), |kb| format!("{} MB", kb / 1024))
    ))
}

fn c8_h2() -> Outcome {
    let lang = fixtures::stmts();
    let mut lexemes = BTreeMap::new();
    lexemes.insert(
        "ID".to_owned(),
        vec!["a".to_owned(), "b".to_owned(), "x".to_owned()],
    );
    lexemes.insert("INT".to_owned(), vec!["1".to_owned(), "42".to_owned()]);
    let programs = generate_programs(&lang.grammar, &lexemes, 1, H2_FILES, 10, 20);
    let corpus = mutate_corpus(&programs, &lang, H2_SEED, H2_EDITS);
    let summary = |kind| {
        let mut cfg = BenchConfig::new(kind, lang.params());
        cfg.repeats = 1;
        let run = run_corpus(&lang, &corpus, &cfg);
        (run.skipped.len(), summarize(&run.records))
    };
    let (skip_plus, plus) = summary(RecovererKind::CPCTPlus);
    let (skip_rev, rev) = summary(RecovererKind::CPCTPlusRev);
    ensure!(skip_plus == 0 && skip_rev == 0, "files skipped");
    ensure!(plus.files >= H2_FILES, "only {} files", plus.files);
    let (cp, cr) = (plus.mean_cost.unwrap_or(0.0), rev.mean_cost.unwrap_or(0.0));
    let detail = format!(
        "error locations {} vs {} (+{:.2}%), mean cost {:.4} vs {:.4}",
        plus.error_locations,
        rev.error_locations,
        (rev.error_locations / plus.error_locations - 1.0) * 100.0,
        cp,
        cr
    );
    ensure!(rev.error_locations >= plus.error_locations, "{}", detail);
    ensure!(cr >= cp, "{}", detail);
    Ok(detail)
}

fn c9_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_owned()
    };
    let input = "class C {\n  int x y;\n}\n";
    let (jl, jy, ji) = (
        write("j.l", fixtures::MINIJAVA_L),
        write("j.y", fixtures::MINIJAVA_Y),
        write("j.in", input),
    );
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(
        ["lrrepair", "--deterministic", &jl, &jy, &ji],
        &mut out,
        &mut err,
    );
    let out = String::from_utf8(out).unwrap();
    let expected = "Parsing error at line 2 col 9. Repair sequences found:\n  1: Delete y\n  2: Insert ,\n  3: Insert =\n";
    ensure!(code == 1, "exit code {}", code);
    ensure!(out == expected, "output was {:?}", out);

    let lang = fixtures::minijava();
    let (toks, stack, i) = at_error(&lang, input);
    let (_, seqs) = oracle::min_repairs(&lang.table, &stack, &toks, i, 3, ORACLE_MAX_COST)
        .ok_or("oracle found nothing")?;
    let rendered = common::render_all(&lang, input, &toks, i, seqs.iter());
    ensure!(
        rendered == set(&["Delete y", "Insert ,", "Insert ="]),
        "oracle found {:?}",
        rendered
    );

    let (cl, cy, ci) = (
        write("c.l", fixtures::CALC_L),
        write("c.y", fixtures::CALC_Y),
        write("c.in", "2 + 3"),
    );
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(["lrrepair", &cl, &cy, &ci], &mut out, &mut err);
    ensure!(code == 0 && out.is_empty(), "calc exit code {}", code);
    Ok("mini-Java report matches byte for byte; calc exits 0".into())
}

fn c10_bench() -> Outcome {
    let lang = fixtures::calc();
    let src = "2 + + 3";
    let params = RecoveryParams {
        deterministic_order: true,
        ..lang.params()
    };
    let files = [lrrepair::bench::CorpusFile {
        name: "one".into(),
        src: src.into(),
    }];
    let mut cfg = BenchConfig::new(RecovererKind::CPCTPlus, params.clone());
    cfg.repeats = 3;
    let run = run_corpus(&lang, &files, &cfg);
    let (toks, stack, i) = at_error(&lang, src);
    let (min, _) = oracle::min_repairs(&lang.table, &stack, &toks, i, 3, ORACLE_MAX_COST)
        .ok_or("oracle found nothing")?;
    let r = lang.parse_tokens(&toks, RecovererKind::CPCTPlus, params);
    let deletes = r.reports[0]
        .applied()
        .unwrap()
        .iter()
        .filter(|x| **x == Repair::Delete)
        .count();
    for rec in &run.records {
        let s = &rec.stats;
        ensure!(
            s.error_locations == 1,
            "{} error locations",
            s.error_locations
        );
        ensure!(s.costs == [min], "costs {:?}, oracle {}", s.costs, min);
        ensure!(s.real_tokens == 4, "{} real tokens", s.real_tokens);
        ensure!(
            s.tokens_deleted == deletes,
            "{} deleted, applied {}",
            s.tokens_deleted,
            deletes
        );
        let want = deletes as f64 / 4.0 * 100.0;
        ensure!(
            s.tokens_skipped_pct() == want,
            "skipped {} want {}",
            s.tokens_skipped_pct(),
            want
        );
    }

    let same: Vec<Record> = (0..5)
        .map(|k| Record {
            repeat: k,
            ..run.records[0].clone()
        })
        .collect();
    let b = bootstrap(&same, 1000, 0.99, 7).map_err(|e| e.to_string())?;
    let widths = [
        b.mean_time.width(),
        b.median_time.width(),
        b.mean_cost.map_or(1.0, |c| c.width()),
        b.failure_pct.width(),
        b.tokens_skipped_pct.width(),
        b.error_locations.width(),
    ];
    ensure!(
        widths.iter().all(|w| *w == 0.0),
        "interval widths {:?}",
        widths
    );
    Ok(format!(
        "1 location, cost {}, {} of 4 tokens deleted; zero-width intervals",
        min, deletes
    ))
}
