//! Direct prediction, scaffolded generation, negative scaffolds and free
//! generation over any [`SequenceModel`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, VariableId};
use crate::infer::{minimal_d_separator, path_interior};
use crate::model::{PromptState, SequenceModel};
use crate::rng::SeededRng;

/// Monte Carlo repetitions per estimate.
pub const DEFAULT_M: usize = 10;

/// Estimate of `p(target = target_value | observed = observed_value)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub observed: VariableId,
    pub observed_value: bool,
    pub target: VariableId,
    pub target_value: bool,
}

impl Query {
    pub fn new(observed: VariableId, observed_value: bool, target: VariableId, target_value: bool) -> Result<Self> {
        if observed == target {
            return Err(Error::param(format!("query observes its own target {target}")));
        }
        Ok(Query {
            observed,
            observed_value,
            target,
            target_value,
        })
    }

    fn prompt(&self) -> PromptState {
        PromptState::new(self.target, vec![(self.observed, self.observed_value)]).expect("observed differs from target")
    }
}

/// Intermediate variables generated in order before reading the target.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaffoldPlan(pub Vec<VariableId>);

impl ScaffoldPlan {
    pub fn vars(&self) -> &[VariableId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One Monte Carlo repetition: generated records and the final `p(target = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<(VariableId, bool)>,
    pub p1: f64,
}

impl Trace {
    pub fn variables(&self) -> Vec<VariableId> {
        self.records.iter().map(|(v, _)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub traces: Vec<Trace>,
    /// Free-generation repetitions discarded for exceeding the step limit.
    pub overflowed: usize,
}

impl Estimate {
    pub fn mean_trace_length(&self) -> f64 {
        if self.traces.is_empty() {
            return 0.0;
        }
        self.traces.iter().map(|t| t.records.len()).sum::<usize>() as f64 / self.traces.len() as f64
    }
}

fn mean_estimate(query: &Query, traces: Vec<Trace>, overflowed: usize) -> Estimate {
    let value = traces
        .iter()
        .map(|t| if query.target_value { t.p1 } else { 1.0 - t.p1 })
        .sum::<f64>()
        / traces.len() as f64;
    Estimate {
        value: value.clamp(0.0, 1.0),
        traces,
        overflowed,
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("need at least one Monte Carlo sample"));
    }
    Ok(())
}

/// The model's probability with only the observed variable in context.
pub fn direct<M: SequenceModel + ?Sized>(model: &M, query: &Query) -> Result<f64> {
    let d = model.value_distribution(&query.prompt(), query.target)?;
    Ok(d.prob(query.target_value))
}

/// Which variables make up a scaffold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaffoldKind {
    /// Every variable on a path between observed and target in the moral
    /// ancestral graph; on a chain, all variables in between.
    Between,
    /// A minimum-size d-separating set. A learner that reads only the last
    /// context variable marginalizes exactly through a single separator,
    /// which an interleaved multi-path scaffold does not allow.
    #[default]
    Minimal,
}

/// Scaffold of the default kind.
pub fn build_scaffold(dag: &Dag, query: &Query) -> Result<ScaffoldPlan> {
    build_scaffold_with(dag, query, ScaffoldKind::default())
}

/// Scaffold ordered by undirected distance from the observed variable,
/// ties by id. Adjacent pairs are an error: they need no scaffold.
pub fn build_scaffold_with(dag: &Dag, query: &Query, kind: ScaffoldKind) -> Result<ScaffoldPlan> {
    let mut plan = match kind {
        ScaffoldKind::Between => path_interior(dag, query.observed, query.target)?,
        ScaffoldKind::Minimal => minimal_d_separator(dag, query.observed, query.target)?,
    };
    let dist = dag.undirected_distances(query.observed);
    plan.sort_by_key(|v| (dist[v.index()].unwrap_or(usize::MAX), *v));
    Ok(ScaffoldPlan(plan))
}

/// Samples the plan's variables one at a time, reads the target, and
/// averages over `m` repetitions.
pub fn scaffolded<M: SequenceModel + ?Sized>(
    model: &M,
    query: &Query,
    plan: &ScaffoldPlan,
    m: usize,
    rng: &mut SeededRng,
) -> Result<Estimate> {
    check_m(m)?;
    let mut traces = Vec::with_capacity(m);
    for _ in 0..m {
        let mut state = query.prompt();
        for &v in plan.vars() {
            let p1 = model.value_distribution(&state, v)?.p1;
            state.push(v, rng.bernoulli(p1))?;
        }
        let p1 = model.value_distribution(&state, query.target)?.p1;
        traces.push(Trace {
            records: state.context()[1..].to_vec(),
            p1,
        });
    }
    Ok(mean_estimate(query, traces, 0))
}

/// Uniform same-size set of variables outside the plan, the observed and
/// the target, in ascending order.
pub fn negative_scaffold(dag: &Dag, plan: &ScaffoldPlan, query: &Query, rng: &mut SeededRng) -> Result<ScaffoldPlan> {
    let eligible: Vec<VariableId> = dag
        .nodes()
        .filter(|v| *v != query.observed && *v != query.target && !plan.vars().contains(v))
        .collect();
    if eligible.len() < plan.len() {
        return Err(Error::InsufficientVariables {
            needed: plan.len(),
            available: eligible.len(),
        });
    }
    let mut picked: Vec<VariableId> = rng.sample_indices(eligible.len(), plan.len()).into_iter().map(|i| eligible[i]).collect();
    picked.sort_unstable();
    Ok(ScaffoldPlan(picked))
}

/// Lets the model pick intermediate variables until it names the target.
///
/// Repetitions that generate more than `max_steps` variables are discarded
/// and counted in [`Estimate::overflowed`].
pub fn free_generation<M: SequenceModel + ?Sized>(
    model: &M,
    query: &Query,
    m: usize,
    max_steps: usize,
    rng: &mut SeededRng,
) -> Result<Estimate> {
    check_m(m)?;
    let mut traces = Vec::with_capacity(m);
    let mut overflowed = 0;
    'rep: for _ in 0..m {
        let mut state = query.prompt();
        for _ in 0..=max_steps {
            let next = model.next_variable_distribution(&state)?.sample(rng);
            if next == query.target {
                let p1 = model.value_distribution(&state, query.target)?.p1;
                traces.push(Trace {
                    records: state.context()[1..].to_vec(),
                    p1,
                });
                continue 'rep;
            }
            if state.contains(next) {
                return Err(Error::Protocol(format!("model proposed {next}, which is already in the context")));
            }
            let p1 = model.value_distribution(&state, next)?.p1;
            state.push(next, rng.bernoulli(p1))?;
        }
        overflowed += 1;
    }
    if traces.is_empty() {
        return Err(Error::EstimationFailed(m));
    }
    Ok(mean_estimate(query, traces, overflowed))
}

/// A plan member never seen together with its predecessor, the observed
/// variable or the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanWarning {
    pub variable: VariableId,
    pub predecessor: VariableId,
}

pub fn plan_quality_warnings(
    plan: &ScaffoldPlan,
    query: &Query,
    cooccurrences: impl Fn(VariableId, VariableId) -> u64,
) -> Vec<PlanWarning> {
    let mut prev = query.observed;
    let mut warnings = Vec::new();
    for &v in plan.vars() {
        if cooccurrences(v, prev) == 0 && cooccurrences(v, query.observed) == 0 && cooccurrences(v, query.target) == 0 {
            warnings.push(PlanWarning {
                variable: v,
                predecessor: prev,
            });
        }
        prev = v;
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assign_cpts, generate_dag, Assignment};
    use crate::infer::{conditional, d_separated};
    use crate::model::{NextVariableDistribution, OracleModel, ValueDistribution};
    use std::collections::BTreeMap;

    fn x(i: usize) -> VariableId {
        VariableId::new(i)
    }

    fn q(o: usize, ov: bool, t: usize) -> Query {
        Query::new(x(o), ov, x(t), true).unwrap()
    }

    fn chain(n: usize) -> Dag {
        Dag::from_edges(n, &(1..n).map(|i| (x(i - 1), x(i))).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn chain_scaffold_is_the_interior() {
        let plan = build_scaffold_with(&chain(5), &q(1, true, 4), ScaffoldKind::Between).unwrap();
        assert_eq!(plan.vars(), &[x(2), x(3)]);
        let plan = build_scaffold_with(&chain(5), &q(4, true, 1), ScaffoldKind::Between).unwrap();
        assert_eq!(plan.vars(), &[x(3), x(2)]);
        assert!(matches!(build_scaffold(&chain(3), &q(0, true, 1)), Err(Error::Adjacent(..))));
    }

    #[test]
    fn parallel_paths_scaffold() {
        let dag = Dag::from_edges(4, &[(x(0), x(1)), (x(0), x(2)), (x(1), x(3)), (x(2), x(3))]).unwrap();
        assert_eq!(build_scaffold(&dag, &q(0, true, 3)).unwrap().vars(), &[x(1), x(2)]);
        assert_eq!(build_scaffold_with(&dag, &q(0, true, 3), ScaffoldKind::Between).unwrap().vars(), &[x(1), x(2)]);
        let chain = chain(5);
        let minimal = build_scaffold_with(&chain, &q(1, true, 4), ScaffoldKind::Minimal).unwrap();
        assert_eq!(minimal.vars(), &[x(2)]);
    }

    #[test]
    fn plans_always_separate() {
        for seed in 0..30 {
            let dag = generate_dag(12, 15, &mut SeededRng::new(seed)).unwrap();
            for a in 0..12 {
                for b in 0..12 {
                    if a == b || dag.adjacent(x(a), x(b)) {
                        continue;
                    }
                    for kind in [ScaffoldKind::Between, ScaffoldKind::Minimal] {
                        let plan = build_scaffold_with(&dag, &q(a, true, b), kind).unwrap();
                        assert!(d_separated(&dag, x(a), x(b), plan.vars()));
                        let dist = dag.undirected_distances(x(a));
                        assert!(plan.vars().windows(2).all(|w| (dist[w[0].index()], w[0]) < (dist[w[1].index()], w[1])));
                    }
                }
            }
        }
    }

    fn net(seed: u64) -> crate::BayesNet {
        let dag = generate_dag(10, 12, &mut SeededRng::new(seed)).unwrap();
        assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(seed + 100)).unwrap()
    }

    #[test]
    fn empty_plan_equals_direct() {
        let oracle = OracleModel::new(net(1));
        let query = Query::new(x(0), true, x(5), false).unwrap();
        let d = direct(&oracle, &query).unwrap();
        let s = scaffolded(&oracle, &query, &ScaffoldPlan::default(), 7, &mut SeededRng::new(0)).unwrap();
        assert!((s.value - d).abs() < 1e-15);
        assert_eq!(s.traces.len(), 7);
        assert!(scaffolded(&oracle, &query, &ScaffoldPlan::default(), 0, &mut SeededRng::new(0)).is_err());
    }

    #[test]
    fn oracle_direct_is_exact() {
        let n = net(2);
        let oracle = OracleModel::new(n.clone());
        let query = q(1, false, 7);
        let exact = conditional(&n, x(7), true, &Assignment::from_iter([(x(1), false)])).unwrap();
        assert!((direct(&oracle, &query).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn negative_scaffolds() {
        let query = q(1, true, 4);
        let plan = ScaffoldPlan(vec![x(2), x(3)]);
        assert!(matches!(
            negative_scaffold(&Dag::empty(5), &plan, &query, &mut SeededRng::new(0)),
            Err(Error::InsufficientVariables { needed: 2, available: 1 })
        ));
        assert!(negative_scaffold(&Dag::empty(5), &ScaffoldPlan::default(), &query, &mut SeededRng::new(0)).unwrap().is_empty());
        let mut rng = SeededRng::new(3);
        for _ in 0..10_000 {
            let neg = negative_scaffold(&Dag::empty(12), &plan, &query, &mut rng).unwrap();
            assert_eq!(neg.len(), 2);
            assert!(neg.vars().windows(2).all(|w| w[0] < w[1]));
            assert!(neg.vars().iter().all(|v| ![x(1), x(2), x(3), x(4)].contains(v)));
        }
    }

    /// Always names the target next; values from a fixed table.
    struct Straight;

    impl SequenceModel for Straight {
        fn value_distribution(&self, state: &PromptState, _query: VariableId) -> Result<ValueDistribution> {
            ValueDistribution::new(0.2 + 0.1 * state.context().len() as f64)
        }

        fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
            NextVariableDistribution::from_weights(BTreeMap::from([(state.target(), 1.0)]))
        }
    }

    /// Never names the target.
    struct Wanderer;

    impl SequenceModel for Wanderer {
        fn value_distribution(&self, _: &PromptState, _: VariableId) -> Result<ValueDistribution> {
            ValueDistribution::new(0.5)
        }

        fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
            let next = (0..1000).map(VariableId::new).find(|v| *v != state.target() && !state.contains(*v)).unwrap();
            NextVariableDistribution::from_weights(BTreeMap::from([(next, 1.0)]))
        }
    }

    #[test]
    fn free_generation_edge_cases() {
        let query = q(0, true, 1);
        let est = free_generation(&Straight, &query, 5, 4, &mut SeededRng::new(0)).unwrap();
        assert_eq!(est.value, direct(&Straight, &query).unwrap());
        assert!(est.traces.iter().all(|t| t.records.is_empty()));

        assert!(matches!(
            free_generation(&Wanderer, &query, 3, 4, &mut SeededRng::new(0)),
            Err(Error::EstimationFailed(3))
        ));
        let oracle = OracleModel::new(net(3));
        assert!(matches!(
            free_generation(&oracle, &query, 3, 4, &mut SeededRng::new(0)),
            Err(Error::UnsupportedOperation(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let n = net(4);
        let oracle = OracleModel::new(n.clone());
        let query = (0..10)
            .flat_map(|a| (0..10).map(move |b| (a, b)))
            .find(|&(a, b)| a != b && !n.dag().adjacent(x(a), x(b)))
            .map(|(a, b)| q(a, true, b))
            .unwrap();
        let plan = build_scaffold(n.dag(), &query).unwrap();
        let a = scaffolded(&oracle, &query, &plan, 20, &mut SeededRng::new(9)).unwrap();
        let b = scaffolded(&oracle, &query, &plan, 20, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.value));
    }

    #[test]
    fn warnings_for_unseen_members() {
        let query = q(0, true, 3);
        let plan = ScaffoldPlan(vec![x(1), x(2)]);
        let seen = |a: VariableId, b: VariableId| u64::from((a.0 as i64 - b.0 as i64).abs() == 1);
        assert!(plan_quality_warnings(&plan, &query, seen).is_empty());
        let none = |_: VariableId, _: VariableId| 0;
        assert_eq!(plan_quality_warnings(&plan, &query, none).len(), 2);
    }
}
