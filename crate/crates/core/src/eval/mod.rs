//! Query batteries over held-out pairs, per-estimate records, bootstrap
//! summaries, learning curves and sample-count sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    build_scaffold_with, direct, free_generation, negative_scaffold, scaffolded, Estimate, Query, ScaffoldKind,
    Trace, DEFAULT_M,
};
use crate::graph::{Assignment, BayesNet, Dag};
use crate::infer::{conditional, d_separated, marginal};
use crate::model::{EmpiricalBackoffModel, SequenceModel};
use crate::obsdist::HeldOutPair;
use crate::pipeline::{serialized_len, Sample};
use crate::rng::SeededRng;

mod summary;

pub use summary::{bootstrap_ci, summarize, write_plot_csv, SummaryRow, SummaryTable, DEFAULT_RESAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Direct,
    Scaffolded,
    NegativeScaffolded,
    Free,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Direct,
        EstimatorKind::Scaffolded,
        EstimatorKind::NegativeScaffolded,
        EstimatorKind::Free,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Direct => "direct",
            EstimatorKind::Scaffolded => "scaffolded",
            EstimatorKind::NegativeScaffolded => "negative_scaffolded",
            EstimatorKind::Free => "free",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param(format!("unknown estimator {s:?}")))
    }
}

/// Both directions times both evidence values, always asking for
/// `target = 1`.
pub fn queries_for_pair(pair: &HeldOutPair) -> [Query; 4] {
    let q = |o, ov, t| Query {
        observed: o,
        observed_value: ov,
        target: t,
        target_value: true,
    };
    [
        q(pair.b, false, pair.a),
        q(pair.b, true, pair.a),
        q(pair.a, false, pair.b),
        q(pair.a, true, pair.b),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub estimators: Vec<EstimatorKind>,
    pub m: usize,
    /// Free-generation step limit; `None` means twice the variable count.
    pub max_steps: Option<usize>,
    pub scaffold_kind: ScaffoldKind,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            estimators: EstimatorKind::ALL.to_vec(),
            m: DEFAULT_M,
            max_steps: None,
            scaffold_kind: ScaffoldKind::default(),
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::param("no estimators requested"));
        }
        if self.m == 0 {
            return Err(Error::param("m must be at least 1"));
        }
        if self.max_steps == Some(0) {
            return Err(Error::param("max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// What is being evaluated: one net, under one training condition.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub net_id: usize,
    pub condition: &'a str,
    pub net: &'a BayesNet,
    /// Training characters behind the model, for learning curves.
    pub corpus_tokens_seen: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub net_id: usize,
    pub condition: String,
    pub estimator: EstimatorKind,
    pub query_index: usize,
    pub observed: crate::graph::VariableId,
    pub observed_value: u8,
    pub target: crate::graph::VariableId,
    pub target_value: u8,
    pub estimate: Option<f64>,
    pub true_conditional: f64,
    pub marginal: f64,
    pub squared_error_true: Option<f64>,
    pub squared_error_marginal: Option<f64>,
    pub trace_length: Option<f64>,
    /// Fraction of traces whose variables d-separate observed from target.
    pub trace_d_separates: Option<f64>,
    pub overflowed: usize,
    pub m: usize,
    pub corpus_tokens_seen: Option<u64>,
    pub error: Option<String>,
}

/// A query left out of the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub net_id: usize,
    pub condition: String,
    pub query: Query,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    pub records: Vec<EstimateRecord>,
    pub skipped: Vec<SkippedQuery>,
}

impl Evaluation {
    pub fn extend(&mut self, other: Evaluation) {
        self.records.extend(other.records);
        self.skipped.extend(other.skipped);
    }
}

/// Errors that end a run instead of being recorded.
fn is_fatal(e: &Error) -> bool {
    matches!(e, Error::RemoteUnavailable(_) | Error::Io(_))
}

/// Fraction of traces whose variable set d-separates the query pair;
/// `None` for no traces.
pub fn d_separation_rate<'a>(dag: &Dag, traces: impl IntoIterator<Item = (&'a Query, &'a Trace)>) -> Option<f64> {
    let (mut hits, mut total) = (0usize, 0usize);
    for (q, t) in traces {
        total += 1;
        hits += d_separated(dag, q.observed, q.target, &t.variables()) as usize;
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

fn run_estimator<M: SequenceModel + ?Sized>(
    model: &M,
    dag: &Dag,
    query: &Query,
    kind: EstimatorKind,
    params: &EvalParams,
    rng: &mut SeededRng,
) -> Result<Estimate> {
    // adjacent pairs get an empty scaffold
    let scaffold = || match build_scaffold_with(dag, query, params.scaffold_kind) {
        Err(Error::Adjacent(..)) => Ok(Default::default()),
        other => other,
    };
    match kind {
        EstimatorKind::Direct => Ok(Estimate {
            value: direct(model, query)?,
            traces: vec![],
            overflowed: 0,
        }),
        EstimatorKind::Scaffolded => scaffolded(model, query, &scaffold()?, params.m, rng),
        EstimatorKind::NegativeScaffolded => {
            let negative = negative_scaffold(dag, &scaffold()?, query, rng)?;
            scaffolded(model, query, &negative, params.m, rng)
        }
        EstimatorKind::Free => {
            let max_steps = params.max_steps.unwrap_or(2 * dag.n_nodes());
            free_generation(model, query, params.m, max_steps, rng)
        }
    }
}

/// Runs every requested estimator on the four queries of every pair.
///
/// Queries whose evidence has probability zero are skipped with a reason.
/// Estimator errors land in the record's `error` field, except for an
/// unreachable backend or I/O failure, which end the run. Each (query,
/// estimator) draws from its own substream of `seed`, so output order and
/// values do not depend on scheduling.
pub fn evaluate<M: SequenceModel + ?Sized>(
    model: &M,
    ctx: &EvalContext<'_>,
    pairs: &[HeldOutPair],
    params: &EvalParams,
    seed: u64,
) -> Result<Evaluation> {
    params.validate()?;
    let queries: Vec<Query> = pairs.iter().flat_map(queries_for_pair).collect();
    let dag = ctx.net.dag();
    let per_query: Vec<Result<(Vec<EstimateRecord>, Option<SkippedQuery>)>> = queries
        .par_iter()
        .enumerate()
        .map(|(qi, query)| {
            let evidence = Assignment::from_iter([(query.observed, query.observed_value)]);
            let truth = match conditional(ctx.net, query.target, true, &evidence) {
                Ok(p) => p,
                Err(Error::ZeroProbabilityEvidence) => {
                    return Ok((
                        vec![],
                        Some(SkippedQuery {
                            net_id: ctx.net_id,
                            condition: ctx.condition.to_string(),
                            query: *query,
                            reason: "zero_probability_evidence".into(),
                        }),
                    ))
                }
                Err(e) => return Err(e),
            };
            let marg = marginal(ctx.net, query.target)?;
            let mut records = Vec::with_capacity(params.estimators.len());
            for &kind in &params.estimators {
                let mut rng = SeededRng::substream(seed, (qi * EstimatorKind::ALL.len() + kind as usize) as u64);
                let outcome = run_estimator(model, dag, query, kind, params, &mut rng);
                let mut record = EstimateRecord {
                    net_id: ctx.net_id,
                    condition: ctx.condition.to_string(),
                    estimator: kind,
                    query_index: qi,
                    observed: query.observed,
                    observed_value: query.observed_value as u8,
                    target: query.target,
                    target_value: query.target_value as u8,
                    estimate: None,
                    true_conditional: truth,
                    marginal: marg,
                    squared_error_true: None,
                    squared_error_marginal: None,
                    trace_length: None,
                    trace_d_separates: None,
                    overflowed: 0,
                    m: if kind == EstimatorKind::Direct { 1 } else { params.m },
                    corpus_tokens_seen: ctx.corpus_tokens_seen,
                    error: None,
                };
                match outcome {
                    Ok(est) => {
                        record.estimate = Some(est.value);
                        record.squared_error_true = Some((est.value - truth).powi(2));
                        record.squared_error_marginal = Some((est.value - marg).powi(2));
                        record.overflowed = est.overflowed;
                        if kind != EstimatorKind::Direct {
                            record.trace_length = Some(est.mean_trace_length());
                            record.trace_d_separates = d_separation_rate(dag, est.traces.iter().map(|t| (query, t)));
                        }
                    }
                    Err(e) if is_fatal(&e) => return Err(e),
                    Err(e) => record.error = Some(e.to_string()),
                }
                records.push(record);
            }
            Ok((records, None))
        })
        .collect();
    let mut out = Evaluation::default();
    for r in per_query {
        let (records, skipped) = r?;
        out.records.extend(records);
        out.skipped.extend(skipped);
    }
    Ok(out)
}

/// The model fitted on the longest corpus prefix within a character budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixFit {
    pub budget: u64,
    pub samples: usize,
    pub characters: u64,
    pub model: EmpiricalBackoffModel,
}

/// Fits the empirical model incrementally and snapshots it at each budget,
/// measured in serialized corpus characters. A budget past the end of the
/// corpus gets the full fit.
pub fn prefix_fits<I>(corpus: I, budgets: &[u64], n_nodes: usize, alpha: f64, tau: u64) -> Result<Vec<PrefixFit>>
where
    I: IntoIterator<Item = Result<Sample>>,
{
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("budgets must be strictly ascending"));
    }
    let mut model = EmpiricalBackoffModel::new(n_nodes, alpha, tau)?;
    let mut fits = Vec::with_capacity(budgets.len());
    let (mut samples, mut characters) = (0usize, 0u64);
    let mut next = 0;
    for sample in corpus {
        let sample = sample?;
        let len = serialized_len(&sample) as u64;
        while next < budgets.len() && characters + len > budgets[next] {
            fits.push(PrefixFit {
                budget: budgets[next],
                samples,
                characters,
                model: model.clone(),
            });
            next += 1;
        }
        if next == budgets.len() {
            return Ok(fits);
        }
        model.observe(&sample)?;
        samples += 1;
        characters += len;
    }
    for &budget in &budgets[next..] {
        fits.push(PrefixFit {
            budget,
            samples,
            characters,
            model: model.clone(),
        });
    }
    Ok(fits)
}

/// Evaluates the prefix fits of one corpus; records carry the characters
/// each fit has seen.
pub fn learning_curve<I>(
    corpus: I,
    budgets: &[u64],
    ctx: &EvalContext<'_>,
    pairs: &[HeldOutPair],
    params: &EvalParams,
    (alpha, tau): (f64, u64),
    seed: u64,
) -> Result<Evaluation>
where
    I: IntoIterator<Item = Result<Sample>>,
{
    let mut out = Evaluation::default();
    for fit in prefix_fits(corpus, budgets, ctx.net.n_nodes(), alpha, tau)? {
        let ctx = EvalContext {
            corpus_tokens_seen: Some(fit.characters),
            ..*ctx
        };
        out.extend(evaluate(&fit.model, &ctx, pairs, params, seed)?);
    }
    Ok(out)
}

/// One evaluation per Monte Carlo sample count; each record carries its `m`.
/// Direct runs once, since it does not depend on `m`.
pub fn sample_count_sweep<M: SequenceModel + ?Sized>(
    model: &M,
    ctx: &EvalContext<'_>,
    pairs: &[HeldOutPair],
    params: &EvalParams,
    ms: &[usize],
    seed: u64,
) -> Result<Evaluation> {
    if ms.is_empty() || ms.contains(&0) {
        return Err(Error::param("sample counts must be at least 1"));
    }
    let sampled: Vec<EstimatorKind> = params.estimators.iter().copied().filter(|k| *k != EstimatorKind::Direct).collect();
    let mut passes: Vec<EvalParams> = Vec::new();
    if params.estimators.contains(&EstimatorKind::Direct) {
        passes.push(EvalParams {
            estimators: vec![EstimatorKind::Direct],
            ..params.clone()
        });
    }
    if !sampled.is_empty() {
        passes.extend(ms.iter().map(|&m| EvalParams {
            estimators: sampled.clone(),
            m,
            ..params.clone()
        }));
    }
    let mut out = Evaluation::default();
    for (i, p) in passes.iter().enumerate() {
        let mut e = evaluate(model, ctx, pairs, p, seed)?;
        // every pass skips the same queries
        if i > 0 {
            e.skipped.clear();
        }
        out.extend(e);
    }
    Ok(out)
}

/// Writes records as CSV with a header.
pub fn write_records_csv<W: std::io::Write>(records: &[EstimateRecord], out: W) -> Result<()> {
    crate::theory::write_rows_csv(records, out)
}

#[cfg(test)]
mod tests;
