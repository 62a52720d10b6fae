//! Closed-form analysis of directed chains `Y_0 → Y_1 → … → Y_{N-1}`:
//! risk minimizers under pairwise local observation, the exact expectation
//! of the scaffolded estimator, and the reasoning-gap and KL checks.
//!
//! Variables are 0-based; `transitions[e]` maps `Y_e` to `Y_{e+1}` and is
//! row-stochastic (`transitions[e][a][b] = p(Y_{e+1} = b | Y_e = a)`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

mod gap;
mod minimizer;

pub use gap::{
    chain_ensemble, gap_check, kl_gap_check, scaffolded_expectation, write_rows_csv, GapReport, GapRow, GapStatus,
    GapSummary, KlRow, IDENTITY_TOLERANCE, VACUOUS_BIAS,
};
pub use minimizer::{
    project_to_simplex, risk, risk_minimizer, Formulation, MinimizerModel, PairTable, ProbeReport, RiskMinimizer,
};

pub const SINKHORN_TOLERANCE: f64 = 1e-12;
pub const SINKHORN_MAX_ITERATIONS: usize = 10_000;
const STOCHASTIC_TOLERANCE: f64 = 1e-12;

pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    initial: Vec<f64>,
    transitions: Vec<Matrix>,
}

impl ChainModel {
    pub fn new(initial: Vec<f64>, transitions: Vec<Matrix>) -> Result<Self> {
        let k = initial.len();
        if k < 2 {
            return Err(Error::param("chain arity must be at least 2"));
        }
        if transitions.is_empty() {
            return Err(Error::param("chain needs at least two variables"));
        }
        check_distribution(&initial, "initial distribution")?;
        for (e, t) in transitions.iter().enumerate() {
            if t.len() != k || t.iter().any(|r| r.len() != k) {
                return Err(Error::param(format!("transition {e} is not {k}x{k}")));
            }
            for row in t {
                check_distribution(row, &format!("transition {e} row"))?;
            }
        }
        Ok(ChainModel { initial, transitions })
    }

    /// Number of variables `N`.
    pub fn len(&self) -> usize {
        self.transitions.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Alphabet size `K`.
    pub fn arity(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Matrix] {
        &self.transitions
    }

    /// Rows and columns of every transition sum to one.
    pub fn is_doubly_stochastic(&self, tolerance: f64) -> bool {
        let k = self.arity();
        self.transitions
            .iter()
            .all(|t| (0..k).all(|b| ((0..k).map(|a| t[a][b]).sum::<f64>() - 1.0).abs() <= tolerance))
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(Error::param(format!("{what} is not a probability distribution")));
    }
    Ok(())
}

/// Row vector times matrix.
pub(crate) fn step(dist: &[f64], t: &Matrix) -> Vec<f64> {
    let k = dist.len();
    (0..k).map(|b| (0..k).map(|a| dist[a] * t[a][b]).sum()).collect()
}

/// `p(Y_i)`.
pub fn chain_marginal(chain: &ChainModel, i: usize) -> Vec<f64> {
    assert!(i < chain.len(), "index {i} out of range");
    chain.transitions[..i].iter().fold(chain.initial.clone(), |d, t| step(&d, t))
}

/// `p(Y_i | Y_j = y_j)` for `i > j`.
pub fn chain_conditional(chain: &ChainModel, i: usize, j: usize, y_j: usize) -> Vec<f64> {
    assert!(j < i && i < chain.len(), "need j < i < N");
    let mut d = vec![0.0; chain.arity()];
    d[y_j] = 1.0;
    chain.transitions[j..i].iter().fold(d, |d, t| step(&d, t))
}

/// Minimizer of `α1 H(p1, q) + α2 H(p2, q)`: the weighted mixture.
pub fn mixture_minimizer(p1: &[f64], p2: &[f64], alpha1: f64, alpha2: f64) -> Result<Vec<f64>> {
    if p1.len() != p2.len() {
        return Err(Error::param("distributions differ in length"));
    }
    if alpha1 < 0.0 || alpha2 < 0.0 || alpha1 + alpha2 <= 0.0 {
        return Err(Error::param("mixture weights must be nonnegative and not both zero"));
    }
    let total = alpha1 + alpha2;
    Ok(p1.iter().zip(p2).map(|(a, b)| (alpha1 * a + alpha2 * b) / total).collect())
}

/// Alternating row/column normalization until both are within
/// [`SINKHORN_TOLERANCE`] of one.
pub fn sinkhorn(mut m: Matrix) -> Result<Matrix> {
    let k = m.len();
    for _ in 0..SINKHORN_MAX_ITERATIONS {
        for row in m.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        for b in 0..k {
            let s: f64 = (0..k).map(|a| m[a][b]).sum();
            (0..k).for_each(|a| m[a][b] /= s);
        }
        let rows_ok = m.iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= SINKHORN_TOLERANCE);
        let cols_ok = (0..k).all(|b| ((0..k).map(|a| m[a][b]).sum::<f64>() - 1.0).abs() <= SINKHORN_TOLERANCE);
        if rows_ok && cols_ok {
            return Ok(m);
        }
    }
    Err(Error::SinkhornNoConvergence(SINKHORN_MAX_ITERATIONS))
}

/// Chain with Dirichlet(1) transition rows. With `doubly_stochastic`, each
/// matrix is Sinkhorn-normalized and the initial distribution is uniform.
pub fn random_chain(n: usize, arity: usize, rng: &mut SeededRng, doubly_stochastic: bool) -> Result<ChainModel> {
    if n < 3 || arity < 2 {
        return Err(Error::param("random chains need n >= 3 and arity >= 2"));
    }
    let initial = if doubly_stochastic {
        vec![1.0 / arity as f64; arity]
    } else {
        rng.dirichlet(1.0, arity)
    };
    let transitions = (0..n - 1)
        .map(|_| {
            let m: Matrix = (0..arity).map(|_| rng.dirichlet(1.0, arity)).collect();
            if doubly_stochastic {
                sinkhorn(m)
            } else {
                Ok(m)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ChainModel::new(initial, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_joint(chain: &ChainModel) -> Vec<(Vec<usize>, f64)> {
        let (n, k) = (chain.len(), chain.arity());
        (0..k.pow(n as u32))
            .map(|code| {
                let ys: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
                let p = chain.initial[ys[0]] * (1..n).map(|i| chain.transitions[i - 1][ys[i - 1]][ys[i]]).product::<f64>();
                (ys, p)
            })
            .collect()
    }

    #[test]
    fn binary_doubly_stochastic_is_symmetric() {
        let mut rng = SeededRng::new(4);
        for _ in 0..20 {
            let c = random_chain(5, 2, &mut rng, true).unwrap();
            for t in c.transitions() {
                assert!((t[0][0] - t[1][1]).abs() < 1e-12);
                assert!((t[0][1] - t[1][0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rows_and_columns_normalize() {
        let mut rng = SeededRng::new(5);
        for flag in [false, true] {
            for _ in 0..100 {
                let c = random_chain(6, 3, &mut rng, flag).unwrap();
                for t in c.transitions() {
                    assert!(t.iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-12));
                }
                if flag {
                    assert!(c.is_doubly_stochastic(1e-12));
                }
            }
        }
        assert!(random_chain(2, 2, &mut rng, true).is_err());
    }

    #[test]
    fn conditionals_agree_with_enumeration() {
        let mut rng = SeededRng::new(6);
        let c = random_chain(6, 2, &mut rng, false).unwrap();
        let joint = brute_joint(&c);
        for i in 0..6 {
            let m = chain_marginal(&c, i);
            for y in 0..2 {
                let brute: f64 = joint.iter().filter(|(ys, _)| ys[i] == y).map(|(_, p)| p).sum();
                assert!((m[y] - brute).abs() < 1e-12);
            }
            for j in 0..i {
                for yj in 0..2 {
                    let cond = chain_conditional(&c, i, j, yj);
                    let pj: f64 = joint.iter().filter(|(ys, _)| ys[j] == yj).map(|(_, p)| p).sum();
                    for y in 0..2 {
                        let both: f64 = joint.iter().filter(|(ys, _)| ys[j] == yj && ys[i] == y).map(|(_, p)| p).sum();
                        assert!((cond[y] - both / pj).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_and_adjacent_conditionals() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let c = ChainModel::new(vec![0.3, 0.7], vec![id.clone(), id]).unwrap();
        assert_eq!(chain_conditional(&c, 2, 0, 1), vec![0.0, 1.0]);
        let mut rng = SeededRng::new(1);
        let c = random_chain(4, 3, &mut rng, false).unwrap();
        assert_eq!(chain_conditional(&c, 2, 1, 2), c.transitions()[1][2]);
    }

    #[test]
    fn mixture_minimizer_cases() {
        let p1 = [0.2, 0.8];
        let p2 = [0.6, 0.4];
        assert_eq!(mixture_minimizer(&p1, &p2, 1.0, 1.0).unwrap(), vec![0.4, 0.6000000000000001]);
        assert_eq!(mixture_minimizer(&p1, &p2, 2.0, 0.0).unwrap(), p1.to_vec());
        assert!(mixture_minimizer(&p1, &p2, 0.0, 0.0).is_err());
    }

    #[test]
    fn mixture_minimizer_beats_random_probes() {
        let ce = |p: &[f64], q: &[f64]| -> f64 { p.iter().zip(q).map(|(a, b)| -a * b.ln()).sum() };
        let mut rng = SeededRng::new(12);
        for _ in 0..20 {
            let p1 = rng.dirichlet(1.0, 3);
            let p2 = rng.dirichlet(1.0, 3);
            let (a1, a2) = (rng.uniform() + 0.1, rng.uniform() + 0.1);
            let q = mixture_minimizer(&p1, &p2, a1, a2).unwrap();
            let objective = |q: &[f64]| a1 * ce(&p1, q) + a2 * ce(&p2, q);
            let best = objective(&q);
            for _ in 0..100 {
                let noise: Vec<f64> = q.iter().map(|x| x + 0.05 * (rng.uniform() - 0.5)).collect();
                let probe = project_to_simplex(&noise);
                if probe.iter().all(|x| *x > 0.0) {
                    assert!(objective(&probe) >= best - 1e-15);
                }
            }
            assert!(best < objective(&p1) && best < objective(&p2));
        }
    }
}
