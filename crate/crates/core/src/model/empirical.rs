use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_query, NextVariableDistribution, PromptState, SequenceModel, ValueDistribution};
use crate::error::{Error, Result};
use crate::graph::VariableId;
use crate::pipeline::Sample;

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_TAU: u64 = 50;

/// Count-based learner that conditions on the last context variable and
/// backs off to the marginal when that pair was rarely seen together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBackoffModel {
    n_nodes: usize,
    alpha: f64,
    tau: u64,
    /// `pair_counts[a * n + b][2 * va + vb]`, both orientations stored.
    pair_counts: Vec<[u64; 4]>,
    /// `id_bigram_counts[a * n + b]`: `b` written right after `a`.
    id_bigram_counts: Vec<u64>,
    unigram_counts: Vec<u64>,
    /// Occurrences with value 1.
    ones: Vec<u64>,
}

impl EmpiricalBackoffModel {
    pub fn new(n_nodes: usize, alpha: f64, tau: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("smoothing alpha must be positive"));
        }
        Ok(EmpiricalBackoffModel {
            n_nodes,
            alpha,
            tau,
            pair_counts: vec![[0; 4]; n_nodes * n_nodes],
            id_bigram_counts: vec![0; n_nodes * n_nodes],
            unigram_counts: vec![0; n_nodes],
            ones: vec![0; n_nodes],
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    fn check(&self, v: VariableId) -> Result<usize> {
        if v.index() < self.n_nodes {
            Ok(v.index())
        } else {
            Err(Error::UnknownVariable(v.to_string()))
        }
    }

    /// Adds one sample to the counts.
    pub fn observe(&mut self, sample: &Sample) -> Result<()> {
        let n = self.n_nodes;
        for (v, _) in sample.records() {
            self.check(*v)?;
        }
        let records = sample.records();
        for (i, &(a, va)) in records.iter().enumerate() {
            self.unigram_counts[a.index()] += 1;
            self.ones[a.index()] += va as u64;
            for &(b, vb) in &records[i + 1..] {
                self.pair_counts[a.index() * n + b.index()][2 * va as usize + vb as usize] += 1;
                self.pair_counts[b.index() * n + a.index()][2 * vb as usize + va as usize] += 1;
            }
        }
        for w in records.windows(2) {
            self.id_bigram_counts[w[0].0.index() * n + w[1].0.index()] += 1;
        }
        Ok(())
    }

    /// `n(a = va, b = vb)`.
    pub fn pair_count(&self, a: VariableId, va: bool, b: VariableId, vb: bool) -> u64 {
        self.pair_counts[a.index() * self.n_nodes + b.index()][2 * va as usize + vb as usize]
    }

    /// Samples containing both `a` and `b`.
    pub fn cooccurrences(&self, a: VariableId, b: VariableId) -> u64 {
        self.pair_counts[a.index() * self.n_nodes + b.index()].iter().sum()
    }

    pub fn bigram_count(&self, a: VariableId, b: VariableId) -> u64 {
        self.id_bigram_counts[a.index() * self.n_nodes + b.index()]
    }

    pub fn unigram_count(&self, v: VariableId) -> u64 {
        self.unigram_counts[v.index()]
    }

    /// Smoothed frequency of `v = 1`.
    pub fn marginal(&self, v: VariableId) -> f64 {
        let i = v.index();
        (self.ones[i] as f64 + self.alpha) / (self.unigram_counts[i] as f64 + 2.0 * self.alpha)
    }

    /// Smoothed `p(query = 1 | given = value)`, or the marginal when the pair
    /// co-occurred fewer than `tau` times (or never).
    pub fn backoff_conditional(&self, query: VariableId, given: VariableId, value: bool) -> f64 {
        if self.cooccurrences(query, given) < self.tau.max(1) {
            return self.marginal(query);
        }
        let ones = self.pair_count(query, true, given, value) as f64;
        let total = ones + self.pair_count(query, false, given, value) as f64;
        (ones + self.alpha) / (total + 2.0 * self.alpha)
    }
}

impl SequenceModel for EmpiricalBackoffModel {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        self.check(query)?;
        check_query(state, query)?;
        let p1 = match state.last() {
            Some((c, vc)) => {
                self.check(c)?;
                self.backoff_conditional(query, c, vc)
            }
            None => self.marginal(query),
        };
        ValueDistribution::new(p1)
    }

    fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
        self.check(state.target())?;
        let last = state.last().map(|(c, _)| self.check(c)).transpose()?;
        let weights: BTreeMap<VariableId, f64> = (0..self.n_nodes)
            .map(VariableId::new)
            .filter(|v| !state.contains(*v))
            .map(|v| {
                let count = match last {
                    Some(c) => self.id_bigram_counts[c * self.n_nodes + v.index()],
                    None => self.unigram_counts[v.index()],
                };
                (v, count as f64 + self.alpha)
            })
            .collect();
        NextVariableDistribution::from_weights(weights)
    }
}

/// Fits the model in a single pass; parse errors propagate.
pub fn fit_empirical<I>(corpus: I, n_nodes: usize, alpha: f64, tau: u64) -> Result<EmpiricalBackoffModel>
where
    I: IntoIterator<Item = Result<Sample>>,
{
    let mut model = EmpiricalBackoffModel::new(n_nodes, alpha, tau)?;
    for sample in corpus {
        model.observe(&sample?)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assign_cpts, generate_dag, Assignment};
    use crate::infer::conditional;
    use crate::obsdist::{ObservationMode, ObservationSpec, RadiusDistribution};
    use crate::pipeline::{generate_corpus, parse_corpus};
    use crate::rng::SeededRng;

    fn x(i: usize) -> VariableId {
        VariableId::new(i)
    }

    #[test]
    fn empty_corpus_gives_one_half() {
        let m = fit_empirical(std::iter::empty(), 3, 1.0, 50).unwrap();
        let s = PromptState::new(x(0), vec![(x(1), true)]).unwrap();
        assert_eq!(m.value_distribution(&s, x(0)).unwrap().p1, 0.5);
    }

    #[test]
    fn one_sample_counts() {
        let corpus = parse_corpus("###\ntarget: X2\nX1=0\nX2=1\n").unwrap();
        let m = fit_empirical(corpus.into_iter().map(Ok), 3, 1.0, 50).unwrap();
        assert_eq!(m.pair_count(x(1), false, x(2), true), 1);
        assert_eq!(m.pair_count(x(2), true, x(1), false), 1);
        assert_eq!(m.cooccurrences(x(1), x(2)), 1);
        assert_eq!(m.bigram_count(x(1), x(2)), 1);
        assert_eq!(m.bigram_count(x(2), x(1)), 0);
        assert_eq!(m.unigram_count(x(0)), 0);
    }

    #[test]
    fn bigram_following() {
        let one = "###\ntarget: X2\nX1=1\nX2=0\n".repeat(200) + &"###\ntarget: X0\nX2=1\nX0=1\n".repeat(5);
        let m = fit_empirical(parse_corpus(&one).unwrap().into_iter().map(Ok), 4, 0.01, 50).unwrap();
        let s = PromptState::new(x(3), vec![(x(1), true)]).unwrap();
        let d = m.next_variable_distribution(&s).unwrap();
        assert!(d.prob(x(2)) > 0.9);
        assert_eq!(d.prob(x(1)), 0.0);
        assert!((d.probs().values().sum::<f64>() - 1.0).abs() < 1e-9);

        // only the target remains
        let s = PromptState::new(x(3), vec![(x(0), true), (x(1), true), (x(2), true)]).unwrap();
        assert_eq!(m.next_variable_distribution(&s).unwrap().prob(x(3)), 1.0);
    }

    #[test]
    fn backoff_and_conditional() {
        let dag = generate_dag(12, 12, &mut SeededRng::new(31)).unwrap();
        let net = assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(32)).unwrap();
        let spec = ObservationSpec {
            mode: ObservationMode::Local,
            locality_graph: net.dag().clone(),
            radius: RadiusDistribution::geometric(0.5).unwrap(),
            dropout: 0.2,
            held_out: vec![],
        };
        let corpus = generate_corpus(&net, &spec, 100_000, 3).unwrap();
        let m = fit_empirical(corpus.iter().cloned().map(Ok), 12, 1.0, 50).unwrap();
        for (p, c) in net.dag().edges() {
            for vp in [false, true] {
                // keep rows with enough data for a 0.03 tolerance (> 3 standard errors)
                if m.pair_count(c, true, p, vp) + m.pair_count(c, false, p, vp) < 3000 {
                    continue;
                }
                let s = PromptState::new(c, vec![(p, vp)]).unwrap();
                let est = m.value_distribution(&s, c).unwrap().p1;
                let exact = conditional(&net, c, true, &Assignment::from_iter([(p, vp)])).unwrap();
                assert!((est - exact).abs() < 0.03, "{p}->{c}: {est} vs {exact}");
            }
        }
        // a pair never seen together falls back to the marginal exactly
        let never = (0..12)
            .flat_map(|a| (0..12).map(move |b| (x(a), x(b))))
            .find(|&(a, b)| a != b && m.cooccurrences(a, b) == 0);
        if let Some((a, b)) = never {
            let s = PromptState::new(b, vec![(a, true)]).unwrap();
            assert_eq!(m.value_distribution(&s, b).unwrap().p1, m.marginal(b));
        }
    }

    #[test]
    fn matches_naive_recount() {
        let dag = generate_dag(10, 10, &mut SeededRng::new(5)).unwrap();
        let net = assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(6)).unwrap();
        let spec = ObservationSpec {
            mode: ObservationMode::FullyObserved,
            locality_graph: net.dag().clone(),
            radius: RadiusDistribution::geometric(0.5).unwrap(),
            dropout: 0.0,
            held_out: vec![],
        };
        let corpus = generate_corpus(&net, &spec, 1000, 1).unwrap();
        let m = fit_empirical(corpus.iter().cloned().map(Ok), 10, 1.0, 50).unwrap();
        for a in 0..10 {
            for b in 0..10 {
                if a == b {
                    continue;
                }
                for va in [false, true] {
                    for vb in [false, true] {
                        let naive = corpus
                            .iter()
                            .filter(|s| s.records().contains(&(x(a), va)) && s.records().contains(&(x(b), vb)))
                            .count() as u64;
                        assert_eq!(m.pair_count(x(a), va, x(b), vb), naive);
                    }
                }
                let bigrams = corpus
                    .iter()
                    .map(|s| s.records().windows(2).filter(|w| w[0].0 == x(a) && w[1].0 == x(b)).count() as u64)
                    .sum::<u64>();
                assert_eq!(m.bigram_count(x(a), x(b)), bigrams);
            }
        }
    }
}
