//! The `lrrepair` command line front end.
//!
//! ```text
//! lrrepair [--recoverer cpctplus|cpctplus-rev|panic|none] [--timeout MS] [--deterministic]
//!          [--print-tree] [--quiet] LEXER GRAMMAR INPUT
//! ```
//!
//! Exits with 0 if the input parsed without errors, 1 if every error was repaired, and 2 if
//! recovery failed or the inputs could not be loaded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use crate::lexer::line_col;
use crate::lrtable::Conflict;
use crate::recovery::{render_sequence, RecovererKind, ReportKind};
use crate::Language;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Recoverer {
    Cpctplus,
    CpctplusRev,
    Panic,
    None,
}

impl From<Recoverer> for RecovererKind {
    fn from(r: Recoverer) -> Self {
        match r {
            Recoverer::Cpctplus => RecovererKind::CPCTPlus,
            Recoverer::CpctplusRev => RecovererKind::CPCTPlusRev,
            Recoverer::Panic => RecovererKind::Panic,
            Recoverer::None => RecovererKind::None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lrrepair",
    about = "Parse a file with a Yacc grammar, repairing syntax errors"
)]
struct Args {
    /// Lexer specification.
    lexer: PathBuf,
    /// Yacc grammar.
    grammar: PathBuf,
    /// File to parse.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cpctplus")]
    recoverer: Recoverer,
    /// Recovery time budget for the whole file, in milliseconds.
    #[arg(long, default_value_t = 500)]
    timeout: u64,
    /// Sort repair sequences so that output is reproducible.
    #[arg(long)]
    deterministic: bool,
    /// Print the parse tree.
    #[arg(long)]
    print_tree: bool,
    /// Print nothing but the parse tree (if requested).
    #[arg(long)]
    quiet: bool,
}

fn read(path: &PathBuf, err: &mut dyn Write) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) => {
            let _ = writeln!(err, "{}: {}", path.display(), e);
            None
        }
    }
}

/// Runs the tool with `args` (including the program name), returning the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{}", text)
            } else {
                write!(err, "{}", text)
            };
            return code;
        }
    };
    match run(&args, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e);
            2
        }
    }
}

fn run(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let (Some(lex_src), Some(grm_src), Some(src)) = (
        read(&args.lexer, err),
        read(&args.grammar, err),
        read(&args.input, err),
    ) else {
        return Ok(2);
    };
    let lang = match Language::new(&grm_src, &lex_src) {
        Ok(l) => l,
        Err(e) => {
            writeln!(err, "{}", e)?;
            return Ok(2);
        }
    };
    if !args.quiet {
        let sr = lang
            .conflicts()
            .iter()
            .filter(|c| matches!(c, Conflict::ShiftReduce { .. }))
            .count();
        let rr = lang.conflicts().len() - sr;
        if sr > 0 {
            writeln!(err, "warning: {} shift/reduce conflicts", sr)?;
        }
        if rr > 0 {
            writeln!(err, "warning: {} reduce/reduce conflicts", rr)?;
        }
    }
    let toks = match lang.lex(&src) {
        Ok(t) => t,
        Err(e) => {
            let (l, c) = line_col(&src, e.offset);
            writeln!(err, "Lexing error at line {} col {}.", l, c)?;
            return Ok(2);
        }
    };

    let mut params = lang.params();
    params.timeout = Duration::from_millis(args.timeout);
    params.deterministic_order = args.deterministic;
    let res = lang.parse_tokens(&toks, args.recoverer.into(), params);

    if !args.quiet {
        for r in &res.reports {
            let (l, c) = r.line_col(&src);
            match &r.kind {
                ReportKind::Repairs { sequences, .. } => {
                    writeln!(out, "Parsing error at line {} col {}. Repair sequences found:", l, c)?;
                    for (i, s) in sequences.iter().enumerate() {
                        let rendered = render_sequence(&lang.grammar, &src, &toks, r.token_index, s);
                        writeln!(out, "  {}: {}", i + 1, rendered)?;
                    }
                }
                ReportKind::Panic { popped, skipped } => writeln!(
                    out,
                    "Parsing error at line {} col {}. Recovered by popping {} states and skipping {} tokens.",
                    l, c, popped, skipped
                )?,
                ReportKind::Failed => writeln!(
                    out,
                    "Parsing error at line {} col {}. No repair sequences found.",
                    l, c
                )?,
            }
        }
    }
    if args.print_tree {
        if let Some(t) = &res.tree {
            write!(out, "{}", t.pp(&lang.grammar, &src))?;
        }
    }

    Ok(if !res.recovery_succeeded {
        2
    } else if res.reports.is_empty() {
        0
    } else {
        1
    })
}
