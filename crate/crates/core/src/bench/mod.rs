//! Corpus experiments: run a recoverer over many files, repeatedly, and summarise.

mod bootstrap;
mod generate;
mod mutate;

pub use crate::parser::RunStats;
pub use bootstrap::{bootstrap, BootstrapError, BootstrapSummary, Interval};
pub use generate::generate_programs;
pub use mutate::mutate_corpus;

use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;

use crate::recovery::{RecovererKind, RecoveryParams};
use crate::Language;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusFile {
    pub name: String,
    pub src: String,
}

/// A file left out of a run, and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

/// The outcome of parsing one file once.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub file: String,
    pub repeat: usize,
    pub recoverer: RecovererKind,
    pub stats: RunStats,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub recoverer: RecovererKind,
    pub params: RecoveryParams,
    pub repeats: usize,
    /// Worker threads; 0 uses all cores, 1 runs sequentially (least timing noise).
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(recoverer: RecovererKind, params: RecoveryParams) -> Self {
        BenchConfig {
            recoverer,
            params,
            repeats: 5,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CorpusRun {
    pub records: Vec<Record>,
    pub skipped: Vec<Skipped>,
}

/// Reads every regular file in `dir`, sorted by name. Unreadable files are reported as
/// skipped.
pub fn load_dir(dir: &Path) -> io::Result<(Vec<CorpusFile>, Vec<Skipped>)> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut files = Vec::new();
    let mut skipped = Vec::new();
    for p in paths {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        match fs::read_to_string(&p) {
            Ok(src) => files.push(CorpusFile { name, src }),
            Err(e) => skipped.push(Skipped {
                name,
                reason: e.to_string(),
            }),
        }
    }
    Ok((files, skipped))
}

/// Parses each file `cfg.repeats` times. Files that do not lex are skipped. Only recovery is
/// timed; lexing happens once per file, outside the timer.
pub fn run_corpus(lang: &Language, files: &[CorpusFile], cfg: &BenchConfig) -> CorpusRun {
    let mut run = CorpusRun::default();
    let mut jobs = Vec::new();
    for f in files {
        match lang.lex(&f.src) {
            Ok(toks) => jobs.push((f, toks)),
            Err(e) => run.skipped.push(Skipped {
                name: f.name.clone(),
                reason: format!("does not lex (byte offset {})", e.offset),
            }),
        }
    }
    let work: Vec<_> = jobs
        .iter()
        .flat_map(|(f, toks)| (0..cfg.repeats).map(move |r| (f, toks, r)))
        .collect();
    let one = |&(f, toks, repeat): &(&&CorpusFile, &Vec<_>, usize)| Record {
        file: f.name.clone(),
        repeat,
        recoverer: cfg.recoverer,
        stats: lang
            .parse_tokens(toks, cfg.recoverer, cfg.params.clone())
            .stats,
    };
    run.records = if cfg.workers == 1 {
        work.iter().map(one).collect()
    } else {
        let mut b = rayon::ThreadPoolBuilder::new();
        if cfg.workers > 1 {
            b = b.num_threads(cfg.workers);
        }
        b.build()
            .unwrap()
            .install(|| work.par_iter().map(one).collect())
    };
    run
}

/// The CSV header written by [`write_csv`].
pub const CSV_HEADER: [&str; 8] = [
    "file",
    "repeat",
    "recoverer",
    "recovery_time_s",
    "success",
    "error_locations",
    "costs",
    "tokens_skipped_pct",
];

/// Writes one row per record. `costs` is a semicolon separated list, empty for runs where
/// recovery failed.
pub fn write_csv<W: io::Write>(records: &[Record], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in records {
        let costs = if r.stats.success {
            r.stats
                .costs
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";")
        } else {
            String::new()
        };
        wtr.write_record([
            r.file.clone(),
            r.repeat.to_string(),
            r.recoverer.to_string(),
            format!("{:.6}", r.stats.recovery_time.as_secs_f64()),
            r.stats.success.to_string(),
            r.stats.error_locations.to_string(),
            costs,
            format!("{:.4}", r.stats.tokens_skipped_pct()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Aggregates over all records of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub files: usize,
    pub mean_time: f64,
    pub median_time: f64,
    /// Mean cost of applied repair sequences, over runs where recovery succeeded. `None` if
    /// there were no such repairs.
    pub mean_cost: Option<f64>,
    pub failure_pct: f64,
    /// Deleted tokens as a percentage of all input tokens.
    pub tokens_skipped_pct: f64,
    /// Error locations summed over files, averaged over repeats.
    pub error_locations: f64,
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub(crate) fn summarize_refs(records: &[&Record]) -> Summary {
    let runs = records.len();
    let mut files: Vec<&str> = records.iter().map(|r| r.file.as_str()).collect();
    files.sort_unstable();
    files.dedup();
    let mut times: Vec<f64> = records
        .iter()
        .map(|r| r.stats.recovery_time.as_secs_f64())
        .collect();
    let mean_time = times.iter().sum::<f64>() / runs.max(1) as f64;
    let costs: Vec<u32> = records
        .iter()
        .filter(|r| r.stats.success)
        .flat_map(|r| r.stats.costs.iter().copied())
        .collect();
    let mean_cost =
        (!costs.is_empty()).then(|| costs.iter().sum::<u32>() as f64 / costs.len() as f64);
    let failed = records.iter().filter(|r| !r.stats.success).count();
    let deleted: usize = records.iter().map(|r| r.stats.tokens_deleted).sum();
    let real: usize = records.iter().map(|r| r.stats.real_tokens).sum();
    let locs: usize = records.iter().map(|r| r.stats.error_locations).sum();
    let repeats = runs as f64 / files.len().max(1) as f64;
    Summary {
        runs,
        files: files.len(),
        mean_time,
        median_time: median(&mut times),
        mean_cost,
        failure_pct: failed as f64 / runs.max(1) as f64 * 100.0,
        tokens_skipped_pct: if real == 0 {
            0.0
        } else {
            deleted as f64 / real as f64 * 100.0
        },
        error_locations: if runs == 0 {
            0.0
        } else {
            locs as f64 / repeats
        },
    }
}

pub fn summarize(records: &[Record]) -> Summary {
    summarize_refs(&records.iter().collect::<Vec<_>>())
}

impl Summary {
    /// True if the recoverer skipped more input than `threshold_pct` percent, in which case
    /// its low error counts may come from discarding input.
    pub fn skips_suspiciously(&self, threshold_pct: f64) -> bool {
        self.tokens_skipped_pct > threshold_pct
    }
}

/// Formats summaries as a table, one row per recoverer.
pub fn summary_table(rows: &[(&str, &Summary)]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<14} {:>10} {:>12} {:>10} {:>9} {:>9} {:>11}",
        "Recoverer", "Mean (s)", "Median (s)", "Cost", "Failed %", "Skipped %", "Error locs"
    )
    .unwrap();
    for (name, s) in rows {
        let cost = s
            .mean_cost
            .map_or_else(|| "-".to_owned(), |c| format!("{:.2}", c));
        writeln!(
            out,
            "{:<14} {:>10.6} {:>12.6} {:>10} {:>9.2} {:>9.2} {:>11.1}",
            name,
            s.mean_time,
            s.median_time,
            cost,
            s.failure_pct,
            s.tokens_skipped_pct,
            s.error_locations
        )
        .unwrap();
    }
    out
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", summary_table(&[("", self)]))
    }
}
