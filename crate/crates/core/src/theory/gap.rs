use std::io::Write;

use serde::Serialize;

use super::{chain_conditional, chain_marginal, random_chain, risk_minimizer, ChainModel, Formulation, RiskMinimizer};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Direct biases below this are treated as zero.
pub const VACUOUS_BIAS: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
const DOUBLY_STOCHASTIC_TOLERANCE: f64 = 1e-9;
/// Spread of per-value fallback weights on one edge below which the edge is
/// treated as having a single weight.
const CONSTANT_LAMBDA_TOLERANCE: f64 = 1e-12;

/// Exact expectation over scaffold draws of the scaffolded estimate of
/// `q*(Y_i | Y_j = y_j)` with all of `Y_{j+1} … Y_{i-1}` as the scaffold,
/// indexed by `y_i`.
pub fn scaffolded_expectation(q: &RiskMinimizer, i: usize, j: usize, y_j: usize) -> Vec<f64> {
    assert!(j < i && i < q.len(), "need j < i < N");
    let k = q.arity();
    let mut e = q.row(j + 1, j, y_j);
    for m in j + 2..=i {
        let mut next = vec![0.0; k];
        for (prev, weight) in e.iter().enumerate() {
            for (y, p) in q.row(m, m - 1, prev).into_iter().enumerate() {
                next[y] += weight * p;
            }
        }
        e = next;
    }
    e
}

/// Outcome of comparing one query's biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapStatus {
    Holds,
    Violated,
    /// The direct estimate is already unbiased.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub chain: u64,
    pub i: usize,
    pub j: usize,
    pub y_i: usize,
    pub y_j: usize,
    pub truth: f64,
    pub direct: f64,
    pub scaffolded: f64,
    pub direct_bias2: f64,
    pub scaffolded_bias2: f64,
    pub ratio: Option<f64>,
    /// Product of `(1 - λ)` over the edges from `j` to `i`, when every edge
    /// has a single fallback weight.
    pub retained: Option<f64>,
    /// `|(scaffolded - truth) - (1 - retained)(direct - truth)|`.
    pub identity_error: Option<f64>,
    pub status: GapStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub formulation: Formulation,
    pub uniform_weight: f64,
    pub chains: usize,
    pub queries: usize,
    pub holds: usize,
    pub violated: usize,
    pub vacuous: usize,
    pub identity_checked: usize,
    pub identity_failures: usize,
    pub max_identity_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub formulation: Formulation,
    pub uniform_weight: f64,
    pub chains: usize,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    pub fn summary(&self) -> GapSummary {
        let count = |s| self.rows.iter().filter(|r| r.status == s).count();
        let errors: Vec<f64> = self.rows.iter().filter_map(|r| r.identity_error).collect();
        GapSummary {
            formulation: self.formulation,
            uniform_weight: self.uniform_weight,
            chains: self.chains,
            queries: self.rows.len(),
            holds: count(GapStatus::Holds),
            violated: count(GapStatus::Violated),
            vacuous: count(GapStatus::Vacuous),
            identity_checked: errors.len(),
            identity_failures: errors.iter().filter(|e| **e > IDENTITY_TOLERANCE).count(),
            max_identity_error: errors.iter().copied().fold(0.0, f64::max),
        }
    }
}

fn retained_fraction(q: &RiskMinimizer, i: usize, j: usize) -> Option<f64> {
    let mut a = 1.0;
    for lam in &q.lambdas()[j..i] {
        let (lo, hi) = lam.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(*l), hi.max(*l)));
        if hi - lo > CONSTANT_LAMBDA_TOLERANCE {
            return None;
        }
        a *= 1.0 - lo;
    }
    Some(a)
}

/// Compares squared biases of the direct and scaffolded estimates of every
/// non-adjacent forward query `p(Y_i = y_i | Y_j = y_j)`, `i > j + 1`.
/// `chains` pairs each chain with an identifier for the report.
pub fn gap_check(chains: &[(u64, ChainModel)], formulation: Formulation, uniform_weight: f64) -> Result<GapReport> {
    let mut rows = Vec::new();
    for (id, chain) in chains {
        if formulation == Formulation::UniformMixture && !chain.is_doubly_stochastic(DOUBLY_STOCHASTIC_TOLERANCE) {
            return Err(Error::AssumptionViolated(format!(
                "chain {id}: the uniform mixture needs doubly stochastic transitions"
            )));
        }
        let q = risk_minimizer(chain, formulation, uniform_weight)?;
        let k = chain.arity();
        for i in 2..chain.len() {
            for j in 0..i - 1 {
                let retained = retained_fraction(&q, i, j);
                let base = q.base(i);
                for y_j in 0..k {
                    if chain_marginal(chain, j)[y_j] == 0.0 {
                        continue;
                    }
                    let truth = chain_conditional(chain, i, j, y_j);
                    let scaffold = scaffolded_expectation(&q, i, j, y_j);
                    for y_i in 0..k {
                        let direct_bias = base[y_i] - truth[y_i];
                        let scaffold_bias = scaffold[y_i] - truth[y_i];
                        let (d2, s2) = (direct_bias * direct_bias, scaffold_bias * scaffold_bias);
                        let status = if direct_bias.abs() < VACUOUS_BIAS {
                            GapStatus::Vacuous
                        } else if s2 < d2 {
                            GapStatus::Holds
                        } else {
                            GapStatus::Violated
                        };
                        rows.push(GapRow {
                            chain: *id,
                            i,
                            j,
                            y_i,
                            y_j,
                            truth: truth[y_i],
                            direct: base[y_i],
                            scaffolded: scaffold[y_i],
                            direct_bias2: d2,
                            scaffolded_bias2: s2,
                            ratio: (status != GapStatus::Vacuous).then(|| s2 / d2),
                            retained,
                            identity_error: retained.map(|a| (scaffold_bias - (1.0 - a) * direct_bias).abs()),
                            status,
                        });
                    }
                }
            }
        }
    }
    Ok(GapReport {
        formulation,
        uniform_weight,
        chains: chains.len(),
        rows,
    })
}

/// `count` random chains from per-chain substreams of `seed`, identified by
/// their index.
pub fn chain_ensemble(count: usize, n: usize, arity: usize, seed: u64, doubly_stochastic: bool) -> Result<Vec<(u64, ChainModel)>> {
    (0..count as u64)
        .map(|c| Ok((c, random_chain(n, arity, &mut SeededRng::substream(seed, c), doubly_stochastic)?)))
        .collect()
}

/// One adjacent pair under the marginal mixture: the KL divergence from the
/// true conditional to the minimizer and to the next variable's marginal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlRow {
    pub chain: u64,
    pub i: usize,
    pub y_i: usize,
    pub kl_minimizer: f64,
    pub kl_marginal: f64,
    pub holds: bool,
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| if *b == 0.0 { f64::INFINITY } else { a * (a / b).ln() })
        .sum()
}

/// `KL[p(Y_{i+1} | Y_i) ‖ q*] ≤ KL[p(Y_{i+1} | Y_i) ‖ p(Y_{i+1})]` for every
/// adjacent pair, with `tolerance` slack.
pub fn kl_gap_check(chains: &[(u64, ChainModel)], tolerance: f64) -> Result<Vec<KlRow>> {
    let mut rows = Vec::new();
    for (id, chain) in chains {
        let q = risk_minimizer(chain, Formulation::MarginalMixture, 0.0)?;
        for (i, t) in chain.transitions().iter().enumerate() {
            let next = chain_marginal(chain, i + 1);
            for (y_i, row) in t.iter().enumerate() {
                let kl_minimizer = kl(row, &q.row(i + 1, i, y_i));
                let kl_marginal = kl(row, &next);
                rows.push(KlRow {
                    chain: *id,
                    i,
                    y_i,
                    kl_minimizer,
                    kl_marginal,
                    holds: kl_minimizer <= kl_marginal + tolerance,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes serializable rows as CSV with a header.
pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
