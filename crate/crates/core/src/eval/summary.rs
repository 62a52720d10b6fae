use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{EstimateRecord, EstimatorKind};
use crate::error::Result;
use crate::rng::SeededRng;

pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Mean with a 95% percentile-bootstrap interval. The interval is widened to
/// contain the mean if resampling noise would leave it outside.
pub fn bootstrap_ci(values: &[f64], resamples: usize, rng: &mut SeededRng) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if resamples == 0 {
        return Some((mean, mean, mean));
    }
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.below(n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        let pos = q * (resamples - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        means[lo] + (means[hi] - means[lo]) * (pos - lo as f64)
    };
    Some((mean, quantile(0.025).min(mean), quantile(0.975).max(mean)))
}

/// Pooled statistics for one (condition, estimator, M, budget) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub condition: String,
    pub estimator: EstimatorKind,
    pub m: usize,
    pub tokens: Option<u64>,
    pub n: usize,
    pub errors: usize,
    pub mse_true: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub mse_marginal: Option<f64>,
    pub marginal_ci_lo: Option<f64>,
    pub marginal_ci_hi: Option<f64>,
    pub mean_trace_length: Option<f64>,
    pub d_separation_rate: Option<f64>,
    pub overflowed: usize,
}

impl SummaryRow {
    /// True when both intervals exist and are disjoint.
    pub fn separated_from(&self, other: &SummaryRow) -> bool {
        match (self.ci_lo, self.ci_hi, other.ci_lo, other.ci_hi) {
            (Some(a_lo), Some(a_hi), Some(b_lo), Some(b_hi)) => a_hi < b_lo || b_hi < a_lo,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub resamples: usize,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    /// First row for `condition` and `estimator`.
    pub fn row(&self, condition: &str, estimator: EstimatorKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.condition == condition && r.estimator == estimator)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Groups records by (condition, estimator, M, budget) and bootstraps the
/// squared errors of each group. Errored records count toward `errors` only.
pub fn summarize(records: &[EstimateRecord], resamples: usize, seed: u64) -> SummaryTable {
    let mut groups: BTreeMap<(String, EstimatorKind, usize, Option<u64>), Vec<&EstimateRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.condition.clone(), r.estimator, r.m, r.corpus_tokens_seen))
            .or_default()
            .push(r);
    }
    let rows = groups
        .into_iter()
        .enumerate()
        .map(|(gi, ((condition, estimator, m, tokens), rs))| {
            let ok: Vec<&EstimateRecord> = rs.iter().copied().filter(|r| r.estimate.is_some()).collect();
            let se_true: Vec<f64> = ok.iter().filter_map(|r| r.squared_error_true).collect();
            let se_marg: Vec<f64> = ok.iter().filter_map(|r| r.squared_error_marginal).collect();
            let t = bootstrap_ci(&se_true, resamples, &mut SeededRng::substream(seed, 2 * gi as u64));
            let mg = bootstrap_ci(&se_marg, resamples, &mut SeededRng::substream(seed, 2 * gi as u64 + 1));
            SummaryRow {
                condition,
                estimator,
                m,
                tokens,
                n: ok.len(),
                errors: rs.len() - ok.len(),
                mse_true: t.map(|x| x.0),
                ci_lo: t.map(|x| x.1),
                ci_hi: t.map(|x| x.2),
                mse_marginal: mg.map(|x| x.0),
                marginal_ci_lo: mg.map(|x| x.1),
                marginal_ci_hi: mg.map(|x| x.2),
                mean_trace_length: mean(ok.iter().filter_map(|r| r.trace_length)),
                d_separation_rate: mean(ok.iter().filter_map(|r| r.trace_d_separates)),
                overflowed: rs.iter().map(|r| r.overflowed).sum(),
            }
        })
        .collect();
    SummaryTable { resamples, seed, rows }
}

#[derive(Serialize)]
struct PlotRow<'a> {
    condition: &'a str,
    estimator: EstimatorKind,
    m: usize,
    tokens: Option<u64>,
    mse: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

/// Long-format plot data: one line per summary cell.
pub fn write_plot_csv<W: Write>(table: &SummaryTable, out: W) -> Result<()> {
    let rows: Vec<PlotRow> = table
        .rows
        .iter()
        .map(|r| PlotRow {
            condition: &r.condition,
            estimator: r.estimator,
            m: r.m,
            tokens: r.tokens,
            mse: r.mse_true,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
        })
        .collect();
    crate::theory::write_rows_csv(&rows, out)
}
