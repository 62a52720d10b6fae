//! Observation distributions: which variables appear together in a sample.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{generate_dag, undirected_neighborhood, BayesNet, Dag, VariableId};
use crate::rng::SeededRng;

/// Distribution of the neighborhood radius `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusDistribution {
    /// `P(k) = (1 - p)^(k - 1) p` on `k = 1, 2, ...`
    Geometric { p: f64 },
    /// `P(k) ∝ k^-s` on `k = 1..=max_radius`
    Zipf { s: f64, max_radius: usize },
}

impl RadiusDistribution {
    pub fn geometric(p: f64) -> Result<Self> {
        let d = RadiusDistribution::Geometric { p };
        d.validate()?;
        Ok(d)
    }

    /// Zipf truncated at the undirected diameter of `graph` (at least 1).
    pub fn zipf_for_graph(s: f64, graph: &Dag) -> Result<Self> {
        let d = RadiusDistribution::Zipf {
            s,
            max_radius: graph.undirected_diameter().max(1),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RadiusDistribution::Geometric { p } if p > 0.0 && p <= 1.0 => Ok(()),
            RadiusDistribution::Geometric { p } => Err(Error::param(format!("geometric parameter {p} not in (0,1]"))),
            RadiusDistribution::Zipf { s, max_radius } if s > 1.0 && max_radius >= 1 => Ok(()),
            RadiusDistribution::Zipf { s, max_radius } => Err(Error::param(format!(
                "zipf needs s > 1 and max_radius >= 1, got s={s}, max_radius={max_radius}"
            ))),
        }
    }
}

/// Radius family before it is fitted to a locality graph; Zipf is
/// truncated at that graph's diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusChoice {
    Geometric { p: f64 },
    Zipf { s: f64 },
}

impl RadiusChoice {
    pub fn resolve(&self, graph: &Dag) -> Result<RadiusDistribution> {
        match *self {
            RadiusChoice::Geometric { p } => RadiusDistribution::geometric(p),
            RadiusChoice::Zipf { s } => RadiusDistribution::zipf_for_graph(s, graph),
        }
    }
}

pub fn sample_radius(dist: &RadiusDistribution, rng: &mut SeededRng) -> usize {
    match *dist {
        RadiusDistribution::Geometric { p } => {
            if p >= 1.0 {
                return 1;
            }
            // inverse CDF: smallest k with 1 - (1-p)^k >= u
            let u = rng.uniform_open_low();
            let k = (u.ln() / (1.0 - p).ln()).ceil();
            (k as usize).max(1)
        }
        RadiusDistribution::Zipf { s, max_radius } => {
            let weights: Vec<f64> = (1..=max_radius).map(|k| (k as f64).powf(-s)).collect();
            rng.categorical(&weights) + 1
        }
    }
}

/// Unordered pair never shown together in training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeldOutPair {
    pub a: VariableId,
    pub b: VariableId,
    pub mi: f64,
}

impl HeldOutPair {
    pub fn new(a: VariableId, b: VariableId, mi: f64) -> Self {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        HeldOutPair { a, b, mi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    Local,
    WrongLocal,
    FullyObserved,
}

impl std::fmt::Display for ObservationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ObservationMode::Local => "local",
            ObservationMode::WrongLocal => "wrong_local",
            ObservationMode::FullyObserved => "fully_observed",
        })
    }
}

impl std::str::FromStr for ObservationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(ObservationMode::Local),
            "wrong_local" => Ok(ObservationMode::WrongLocal),
            "fully_observed" => Ok(ObservationMode::FullyObserved),
            other => Err(Error::param(format!("unknown observation mode {other:?}"))),
        }
    }
}

/// The observation distribution over variable subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub mode: ObservationMode,
    /// Edges of the graph neighborhoods are measured in. Unused when fully observed.
    #[serde(with = "edge_list")]
    pub locality_graph: Dag,
    pub radius: RadiusDistribution,
    pub dropout: f64,
    pub held_out: Vec<HeldOutPair>,
}

impl ObservationSpec {
    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        self.radius.validate()?;
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param(format!("dropout {} not in [0,1)", self.dropout)));
        }
        if self.locality_graph.n_nodes() != n_nodes {
            return Err(Error::param(format!(
                "locality graph has {} nodes, data net has {n_nodes}",
                self.locality_graph.n_nodes()
            )));
        }
        for p in &self.held_out {
            if p.a == p.b || p.a.index() >= n_nodes || p.b.index() >= n_nodes {
                return Err(Error::param(format!("invalid held-out pair ({}, {})", p.a, p.b)));
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.locality_graph.n_nodes()
    }
}

/// Substream of the condition seed that draws the wrong-local graph.
const WRONG_LOCAL_STREAM: u64 = u64::MAX;

/// Observation spec for one training condition of `net`. The wrong-local
/// graph is a fresh random DAG with the same node and edge counts, drawn
/// from `seed`.
pub fn spec_for_condition(
    net: &BayesNet,
    mode: ObservationMode,
    radius: RadiusChoice,
    dropout: f64,
    held_out: Vec<HeldOutPair>,
    seed: u64,
) -> Result<ObservationSpec> {
    let locality_graph = match mode {
        ObservationMode::WrongLocal => {
            let dag = net.dag();
            generate_dag(dag.n_nodes(), dag.edges().len(), &mut SeededRng::substream(seed, WRONG_LOCAL_STREAM))?
        }
        ObservationMode::Local | ObservationMode::FullyObserved => net.dag().clone(),
    };
    let spec = ObservationSpec {
        mode,
        radius: radius.resolve(&locality_graph)?,
        locality_graph,
        dropout,
        held_out,
    };
    spec.validate(net.n_nodes())?;
    Ok(spec)
}

/// One draw from the observation distribution.
pub fn select_variables(spec: &ObservationSpec, rng: &mut SeededRng) -> BTreeSet<VariableId> {
    let n = spec.n_nodes();
    let mut selected = match spec.mode {
        ObservationMode::FullyObserved => (0..n).map(VariableId::new).collect(),
        ObservationMode::Local | ObservationMode::WrongLocal => {
            let center = VariableId::new(rng.below(n));
            let k = sample_radius(&spec.radius, rng);
            let mut region = undirected_neighborhood(&spec.locality_graph, center, k);
            region.retain(|_| !rng.bernoulli(spec.dropout));
            region
        }
    };
    for pair in &spec.held_out {
        if selected.contains(&pair.a) && selected.contains(&pair.b) {
            if rng.bernoulli(0.5) {
                selected.remove(&pair.a);
            } else {
                selected.remove(&pair.b);
            }
        }
    }
    selected
}

/// Number of variable sets containing both members of some held-out pair.
pub fn verify_exclusion<'a, I>(samples: I, held_out: &[HeldOutPair]) -> usize
where
    I: IntoIterator<Item = &'a BTreeSet<VariableId>>,
{
    samples
        .into_iter()
        .filter(|s| held_out.iter().any(|p| s.contains(&p.a) && s.contains(&p.b)))
        .count()
}

mod edge_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::graph::{Dag, VariableId};

    #[derive(Serialize, Deserialize)]
    struct Edges {
        n_nodes: usize,
        edges: Vec<[u32; 2]>,
    }

    pub fn serialize<S: Serializer>(dag: &Dag, s: S) -> Result<S::Ok, S::Error> {
        Edges {
            n_nodes: dag.n_nodes(),
            edges: dag.edges().into_iter().map(|(p, c)| [p.0, c.0]).collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dag, D::Error> {
        let e = Edges::deserialize(d)?;
        let edges: Vec<_> = e.edges.iter().map(|[p, c]| (VariableId(*p), VariableId(*c))).collect();
        Dag::from_edges(e.n_nodes, &edges).map_err(serde::de::Error::custom)
    }
}
