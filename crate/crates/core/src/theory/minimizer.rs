use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{chain_marginal, mixture_minimizer, ChainModel, Matrix};
use crate::error::{Error, Result};
use crate::graph::VariableId;
use crate::model::{check_query, NextVariableDistribution, PromptState, SequenceModel, ValueDistribution};
use crate::rng::SeededRng;

/// What a pairwise sequence looks like when the pair is not drawn from
/// inside one local neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Pairs straddling two independently sampled neighborhoods: the second
    /// value follows its marginal.
    MarginalMixture,
    /// Observation sequences mixed with uniform noise sequences of total
    /// weight `uniform_weight`.
    UniformMixture,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::MarginalMixture => "marginal_mixture",
            Formulation::UniformMixture => "uniform_mixture",
        })
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marginal_mixture" => Ok(Formulation::MarginalMixture),
            "uniform_mixture" => Ok(Formulation::UniformMixture),
            other => Err(Error::param(format!("unknown formulation {other:?}"))),
        }
    }
}

/// Table of next-value distributions `q(v2 | i1, v1, i2)` for every ordered
/// index pair, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    n: usize,
    k: usize,
    rows: Vec<f64>,
}

impl PairTable {
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize, usize) -> Vec<f64>) -> Self {
        let mut rows = Vec::with_capacity(n * n * k * k);
        for i1 in 0..n {
            for i2 in 0..n {
                for v1 in 0..k {
                    let row = f(i1, i2, v1);
                    assert_eq!(row.len(), k, "row length");
                    rows.extend(row);
                }
            }
        }
        PairTable { n, k, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    fn offset(&self, i1: usize, i2: usize, v1: usize) -> usize {
        ((i1 * self.n + i2) * self.k + v1) * self.k
    }

    pub fn row(&self, i1: usize, i2: usize, v1: usize) -> &[f64] {
        let o = self.offset(i1, i2, v1);
        &self.rows[o..o + self.k]
    }

    pub fn row_mut(&mut self, i1: usize, i2: usize, v1: usize) -> &mut [f64] {
        let o = self.offset(i1, i2, v1);
        &mut self.rows[o..o + self.k]
    }

    pub fn rows_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.rows.chunks_mut(self.k)
    }
}

/// Closed-form risk minimizer over a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskMinimizer {
    formulation: Formulation,
    uniform_weight: f64,
    k: usize,
    marginals: Vec<Vec<f64>>,
    /// `forward[e][v]`: `q*(Y_{e+1} | Y_e = v)`.
    forward: Vec<Matrix>,
    /// `backward[e][v]`: `q*(Y_e | Y_{e+1} = v)`.
    backward: Vec<Matrix>,
    /// `lambdas[e][v]`: weight on the fallback distribution in `forward[e][v]`.
    lambdas: Vec<Vec<f64>>,
}

/// Closed-form minimizer. `uniform_weight` only enters the uniform mixture.
pub fn risk_minimizer(chain: &ChainModel, formulation: Formulation, uniform_weight: f64) -> Result<RiskMinimizer> {
    if !(uniform_weight >= 0.0 && uniform_weight.is_finite()) {
        return Err(Error::param("uniform_weight must be a nonnegative number"));
    }
    let (n, k) = (chain.len(), chain.arity());
    let marginals: Vec<Vec<f64>> = (0..n).map(|i| chain_marginal(chain, i)).collect();
    let uniform = vec![1.0 / k as f64; k];
    let mut forward = Vec::with_capacity(n - 1);
    let mut backward = Vec::with_capacity(n - 1);
    let mut lambdas = Vec::with_capacity(n - 1);
    for (e, t) in chain.transitions().iter().enumerate() {
        match formulation {
            Formulation::MarginalMixture => {
                let f = t
                    .iter()
                    .map(|row| mixture_minimizer(row, &marginals[e + 1], 0.5, 0.5))
                    .collect::<Result<Matrix>>()?;
                let b = (0..k)
                    .map(|v| mixture_minimizer(&backward_conditional(&marginals, t, e, v), &marginals[e], 0.5, 0.5))
                    .collect::<Result<Matrix>>()?;
                forward.push(f);
                backward.push(b);
                lambdas.push(vec![0.5; k]);
            }
            Formulation::UniformMixture => {
                let u_w = uniform_weight / (n * n * k) as f64;
                let lam: Vec<f64> = (0..k)
                    .map(|v| {
                        let p_w = marginals[e][v] / (n - 1) as f64;
                        if u_w + p_w == 0.0 {
                            1.0
                        } else {
                            u_w / (u_w + p_w)
                        }
                    })
                    .collect();
                forward.push(
                    t.iter()
                        .zip(&lam)
                        .map(|(row, &l)| row.iter().map(|p| l / k as f64 + (1.0 - l) * p).collect())
                        .collect(),
                );
                backward.push(vec![uniform.clone(); k]);
                lambdas.push(lam);
            }
        }
    }
    Ok(RiskMinimizer {
        formulation,
        uniform_weight,
        k,
        marginals,
        forward,
        backward,
        lambdas,
    })
}

fn backward_conditional(marginals: &[Vec<f64>], t: &Matrix, e: usize, v: usize) -> Vec<f64> {
    let pv = marginals[e + 1][v];
    if pv == 0.0 {
        return marginals[e].clone();
    }
    (0..t.len()).map(|y| marginals[e][y] * t[y][v] / pv).collect()
}

impl RiskMinimizer {
    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn uniform_weight(&self) -> f64 {
        self.uniform_weight
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    /// Per-edge, per-value fallback weights of the forward rows.
    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    /// The distribution used for a pair that never appears inside one
    /// neighborhood.
    pub fn base(&self, i: usize) -> Vec<f64> {
        match self.formulation {
            Formulation::MarginalMixture => self.marginals[i].clone(),
            Formulation::UniformMixture => vec![1.0 / self.k as f64; self.k],
        }
    }

    /// `q*(Y_i | Y_j = v)`.
    pub fn row(&self, i: usize, j: usize, v: usize) -> Vec<f64> {
        if i == j + 1 {
            self.forward[j][v].clone()
        } else if j == i + 1 {
            self.backward[i][v].clone()
        } else {
            self.base(i)
        }
    }

    /// Indexed `(i1, i2, v1)`: the row `q*(Y_{i2} | Y_{i1} = v1)`.
    pub fn table(&self) -> PairTable {
        PairTable::from_fn(self.len(), self.k, |i1, i2, v1| self.row(i2, i1, v1))
    }
}

fn cross_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for (a, b) in p.iter().zip(q) {
        if *a > 0.0 {
            if *b <= 0.0 {
                return Err(Error::LogOfZero);
            }
            h -= a * b.ln();
        }
    }
    Ok(h)
}

/// Expected negative log-likelihood of the final value of a pairwise
/// sequence under `table`. `uniform_weight` only enters the uniform mixture.
pub fn risk(chain: &ChainModel, table: &PairTable, formulation: Formulation, uniform_weight: f64) -> Result<f64> {
    let (n, k) = (chain.len(), chain.arity());
    if table.n() != n || table.arity() != k {
        return Err(Error::param("pair table does not match the chain"));
    }
    if !(uniform_weight >= 0.0 && uniform_weight.is_finite()) {
        return Err(Error::param("uniform_weight must be a nonnegative number"));
    }
    let marginals: Vec<Vec<f64>> = (0..n).map(|i| chain_marginal(chain, i)).collect();
    let mut total = 0.0;
    match formulation {
        Formulation::UniformMixture => {
            for (e, t) in chain.transitions().iter().enumerate() {
                for v in 0..k {
                    let w = marginals[e][v] / (n - 1) as f64;
                    if w > 0.0 {
                        total += w * cross_entropy(&t[v], table.row(e, e + 1, v))?;
                    }
                }
            }
            if uniform_weight > 0.0 {
                let uniform = vec![1.0 / k as f64; k];
                let w = uniform_weight / (n * n * k) as f64;
                for i1 in 0..n {
                    for i2 in 0..n {
                        for v in 0..k {
                            total += w * cross_entropy(&uniform, table.row(i1, i2, v))?;
                        }
                    }
                }
            }
        }
        Formulation::MarginalMixture => {
            let pairs = (n * (n - 1)) as f64;
            for i1 in 0..n {
                for i2 in (0..n).filter(|&i2| i2 != i1) {
                    for v in 0..k {
                        let w = marginals[i1][v] / pairs;
                        if w == 0.0 {
                            continue;
                        }
                        let inside = if i2 == i1 + 1 {
                            Some(chain.transitions()[i1][v].clone())
                        } else if i1 == i2 + 1 {
                            Some(backward_conditional(&marginals, &chain.transitions()[i2], i2, v))
                        } else {
                            None
                        };
                        let target = match inside {
                            Some(c) => mixture_minimizer(&c, &marginals[i2], 0.5, 0.5)?,
                            None => marginals[i2].clone(),
                        };
                        total += w * cross_entropy(&target, table.row(i1, i2, v))?;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Outcome of [`RiskMinimizer::perturbation_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub baseline: f64,
    pub perturbations: usize,
    /// Perturbations whose risk did not exceed the baseline.
    pub failures: usize,
    pub min_increase: f64,
}

impl RiskMinimizer {
    /// Perturbs every row of the minimizer's table by a random direction of
    /// Euclidean norm `magnitude`, projects back onto the simplex, and
    /// compares risks. A projected zero under positive target mass counts as
    /// infinite risk.
    pub fn perturbation_probe(
        &self,
        chain: &ChainModel,
        perturbations: usize,
        magnitude: f64,
        rng: &mut SeededRng,
    ) -> Result<ProbeReport> {
        let table = self.table();
        let baseline = risk(chain, &table, self.formulation, self.uniform_weight)?;
        let mut failures = 0;
        let mut min_increase = f64::INFINITY;
        for _ in 0..perturbations {
            let mut probe = table.clone();
            for row in probe.rows_mut() {
                let mut d: Vec<f64> = row.iter().map(|_| rng.standard_normal()).collect();
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                d.iter_mut().for_each(|x| *x -= mean);
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                let moved: Vec<f64> = row.iter().zip(&d).map(|(q, x)| q + magnitude * x / norm).collect();
                row.copy_from_slice(&project_to_simplex(&moved));
            }
            let r = match risk(chain, &probe, self.formulation, self.uniform_weight) {
                Ok(r) => r,
                Err(Error::LogOfZero) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let increase = r - baseline;
            if increase <= 0.0 {
                failures += 1;
            }
            min_increase = min_increase.min(increase);
        }
        Ok(ProbeReport {
            baseline,
            perturbations,
            failures,
            min_increase,
        })
    }
}

/// Binary-chain minimizer as a sequence model: variable `Xi` is `Y_i`, and
/// the value distribution conditions on the last context record only.
#[derive(Debug, Clone)]
pub struct MinimizerModel {
    minimizer: RiskMinimizer,
}

impl MinimizerModel {
    pub fn new(minimizer: RiskMinimizer) -> Result<Self> {
        if minimizer.arity() != 2 {
            return Err(Error::param("sequence models over chains need arity 2"));
        }
        Ok(MinimizerModel { minimizer })
    }

    fn check(&self, v: VariableId) -> Result<usize> {
        if v.index() < self.minimizer.len() {
            Ok(v.index())
        } else {
            Err(Error::UnknownVariable(v.to_string()))
        }
    }
}

impl SequenceModel for MinimizerModel {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        let i = self.check(query)?;
        check_query(state, query)?;
        let row = match state.last() {
            Some((c, vc)) => self.minimizer.row(i, self.check(c)?, vc as usize),
            None => self.minimizer.base(i),
        };
        ValueDistribution::new(row[1].clamp(0.0, 1.0))
    }

    fn next_variable_distribution(&self, _state: &PromptState) -> Result<NextVariableDistribution> {
        Err(Error::UnsupportedOperation("next_var on a chain minimizer"))
    }
}
