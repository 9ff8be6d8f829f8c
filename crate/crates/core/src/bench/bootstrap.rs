use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{summarize_refs, Record};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapSummary {
    pub mean_time: Interval,
    pub median_time: Interval,
    /// `None` if no run recovered successfully.
    pub mean_cost: Option<Interval>,
    pub failure_pct: Interval,
    pub tokens_skipped_pct: Interval,
    pub error_locations: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum BootstrapError {
    #[error("no records to bootstrap")]
    Empty,
    #[error("confidence must lie strictly between 0 and 1")]
    BadConfidence,
}

fn percentile_interval(mut xs: Vec<f64>, confidence: f64) -> Interval {
    xs.sort_by(|a, b| a.total_cmp(b));
    let tail = (1.0 - confidence) / 2.0;
    let at = |q: f64| xs[((q * (xs.len() - 1) as f64).round() as usize).min(xs.len() - 1)];
    Interval {
        lo: at(tail),
        hi: at(1.0 - tail),
    }
}

/// Percentile bootstrap intervals. Each iteration picks one repeat per file at random and
/// summarises the picks. Costs are resampled only from runs whose recovery succeeded.
pub fn bootstrap(
    records: &[Record],
    iterations: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapSummary, BootstrapError> {
    if records.is_empty() || iterations == 0 {
        return Err(BootstrapError::Empty);
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(BootstrapError::BadConfidence);
    }
    let mut by_file: BTreeMap<&str, Vec<&Record>> = BTreeMap::new();
    for r in records {
        by_file.entry(&r.file).or_default().push(r);
    }
    let ok_by_file: Vec<Vec<&Record>> = by_file
        .values()
        .map(|rs| rs.iter().copied().filter(|r| r.stats.success).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean_t, mut median_t, mut cost, mut fail, mut skip, mut locs) =
        (vec![], vec![], vec![], vec![], vec![], vec![]);
    for _ in 0..iterations {
        let sample: Vec<&Record> = by_file
            .values()
            .map(|rs| rs[rng.gen_range(0..rs.len())])
            .collect();
        let s = summarize_refs(&sample);
        mean_t.push(s.mean_time);
        median_t.push(s.median_time);
        fail.push(s.failure_pct);
        skip.push(s.tokens_skipped_pct);
        locs.push(s.error_locations);
        let ok_sample: Vec<&Record> = ok_by_file
            .iter()
            .filter(|rs| !rs.is_empty())
            .map(|rs| rs[rng.gen_range(0..rs.len())])
            .collect();
        if let Some(c) = summarize_refs(&ok_sample).mean_cost {
            cost.push(c);
        }
    }
    Ok(BootstrapSummary {
        mean_time: percentile_interval(mean_t, confidence),
        median_time: percentile_interval(median_t, confidence),
        mean_cost: (!cost.is_empty()).then(|| percentile_interval(cost, confidence)),
        failure_pct: percentile_interval(fail, confidence),
        tokens_skipped_pct: percentile_interval(skip, confidence),
        error_locations: percentile_interval(locs, confidence),
    })
}
