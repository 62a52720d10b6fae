//! Random DAGs, binary Bayes nets, ancestral sampling and graph queries.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Consecutive rejected candidate edges tolerated by [`generate_dag`].
pub const MAX_EDGE_REJECTIONS: usize = 10_000;

/// Version tag written into serialized nets.
pub const NET_FORMAT_VERSION: u32 = 1;

/// A variable index, displayed as `X<index>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub u32);

impl VariableId {
    pub fn new(index: usize) -> Self {
        VariableId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

impl FromStr for VariableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .strip_prefix('X')
            .ok_or_else(|| Error::UnknownVariable(s.to_string()))?;
        let canonical = !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && (digits == "0" || !digits.starts_with('0'));
        if !canonical {
            return Err(Error::UnknownVariable(s.to_string()));
        }
        digits
            .parse::<u32>()
            .map(VariableId)
            .map_err(|_| Error::UnknownVariable(s.to_string()))
    }
}

impl Serialize for VariableId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VariableId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Directed acyclic graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<VariableId>>,
    children: Vec<Vec<VariableId>>,
    n_edges: usize,
}

impl Dag {
    pub fn empty(n_nodes: usize) -> Self {
        Dag {
            parents: vec![Vec::new(); n_nodes],
            children: vec![Vec::new(); n_nodes],
            n_edges: 0,
        }
    }

    /// Builds a DAG from `(parent, child)` pairs, rejecting self-loops,
    /// duplicates, out-of-range ids and cycles.
    pub fn from_edges(n_nodes: usize, edges: &[(VariableId, VariableId)]) -> Result<Self> {
        let mut dag = Dag::empty(n_nodes);
        for &(p, c) in edges {
            if p.index() >= n_nodes || c.index() >= n_nodes {
                return Err(Error::InvalidGraph(format!("edge {p}->{c} out of range")));
            }
            if p == c {
                return Err(Error::InvalidGraph(format!("self-loop on {p}")));
            }
            if dag.has_edge(p, c) {
                return Err(Error::InvalidGraph(format!("duplicate edge {p}->{c}")));
            }
            dag.insert_edge(p, c);
        }
        topological_order(&dag)?;
        Ok(dag)
    }

    fn insert_edge(&mut self, parent: VariableId, child: VariableId) {
        let ps = &mut self.parents[child.index()];
        let pos = ps.binary_search(&parent).unwrap_err();
        ps.insert(pos, parent);
        let cs = &mut self.children[parent.index()];
        let pos = cs.binary_search(&child).unwrap_err();
        cs.insert(pos, child);
        self.n_edges += 1;
    }

    pub fn n_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = VariableId> {
        (0..self.n_nodes()).map(VariableId::new)
    }

    pub fn parents(&self, v: VariableId) -> &[VariableId] {
        &self.parents[v.index()]
    }

    pub fn children(&self, v: VariableId) -> &[VariableId] {
        &self.children[v.index()]
    }

    pub fn has_edge(&self, parent: VariableId, child: VariableId) -> bool {
        self.children[parent.index()].binary_search(&child).is_ok()
    }

    /// True if an edge joins `a` and `b` in either direction.
    pub fn adjacent(&self, a: VariableId, b: VariableId) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Edges sorted by `(parent, child)`.
    pub fn edges(&self) -> Vec<(VariableId, VariableId)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (VariableId::new(p), c)))
            .collect()
    }

    /// Parents and children of `v`, ascending.
    pub fn neighbors(&self, v: VariableId) -> Vec<VariableId> {
        let mut out: Vec<VariableId> = self.parents(v).iter().chain(self.children(v)).copied().collect();
        out.sort_unstable();
        out
    }

    /// Directed reachability `from ->* to`.
    pub fn reaches(&self, from: VariableId, to: VariableId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        seen[from.index()] = true;
        while let Some(v) = stack.pop() {
            for &c in self.children(v) {
                if c == to {
                    return true;
                }
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// `nodes` together with all of their ancestors.
    pub fn ancestral_closure(&self, nodes: impl IntoIterator<Item = VariableId>) -> Vec<bool> {
        let mut keep = vec![false; self.n_nodes()];
        let mut stack: Vec<VariableId> = nodes.into_iter().collect();
        for v in &stack {
            keep[v.index()] = true;
        }
        while let Some(v) = stack.pop() {
            for &p in self.parents(v) {
                if !keep[p.index()] {
                    keep[p.index()] = true;
                    stack.push(p);
                }
            }
        }
        keep
    }

    /// Undirected BFS distances from `source`; `None` for unreachable nodes.
    pub fn undirected_distances(&self, source: VariableId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_nodes()];
        dist[source.index()] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.index()].unwrap();
            for &w in self.parents(v).iter().chain(self.children(v)) {
                if dist[w.index()].is_none() {
                    dist[w.index()] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Largest finite undirected distance between any two nodes.
    pub fn undirected_diameter(&self) -> usize {
        self.nodes()
            .map(|v| self.undirected_distances(v).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Samples a random DAG by adding uniformly drawn ordered vertex pairs,
/// re-drawing candidates that duplicate an edge or close a cycle.
pub fn generate_dag(n_nodes: usize, n_edges: usize, rng: &mut SeededRng) -> Result<Dag> {
    let max = n_nodes * n_nodes.saturating_sub(1) / 2;
    if n_edges > max {
        return Err(Error::InfeasibleEdgeCount {
            n_nodes,
            requested: n_edges,
            max,
        });
    }
    let mut dag = Dag::empty(n_nodes);
    for _ in 0..n_edges {
        let mut rejections = 0;
        loop {
            let p = rng.below(n_nodes);
            let mut c = rng.below(n_nodes - 1);
            if c >= p {
                c += 1;
            }
            let (p, c) = (VariableId::new(p), VariableId::new(c));
            // a cycle appears iff the candidate parent is reachable from the child
            if !dag.has_edge(p, c) && !dag.reaches(c, p) {
                dag.insert_edge(p, c);
                break;
            }
            rejections += 1;
            if rejections >= MAX_EDGE_REJECTIONS {
                return Err(Error::GenerationStuck { rejections });
            }
        }
    }
    Ok(dag)
}

/// Kahn's algorithm; ties broken by smallest index.
pub fn topological_order(dag: &Dag) -> Result<Vec<VariableId>> {
    let n = dag.n_nodes();
    let mut indegree: Vec<usize> = (0..n).map(|i| dag.parents[i].len()).collect();
    let mut ready: BinaryHeap<Reverse<VariableId>> = dag
        .nodes()
        .filter(|v| indegree[v.index()] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in dag.children(v) {
            indegree[c.index()] -= 1;
            if indegree[c.index()] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() != n {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}

/// All nodes within undirected distance `k` of `center`, center included.
pub fn undirected_neighborhood(dag: &Dag, center: VariableId, k: usize) -> BTreeSet<VariableId> {
    dag.undirected_distances(center)
        .into_iter()
        .enumerate()
        .filter(|(_, d)| matches!(d, Some(d) if *d <= k))
        .map(|(i, _)| VariableId::new(i))
        .collect()
}

/// Conditional probability table for a binary node.
///
/// `table[code]` is `p(owner = 1 | parents)`, where bit `k` of `code` is the
/// value of `parents[k]` and parents are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub owner: VariableId,
    pub parents: Vec<VariableId>,
    pub table: Vec<f64>,
}

impl Cpt {
    pub fn new(owner: VariableId, parents: Vec<VariableId>, table: Vec<f64>) -> Result<Self> {
        if !parents.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidNet(format!("parents of {owner} must be strictly ascending")));
        }
        if table.len() != 1usize << parents.len() {
            return Err(Error::InvalidNet(format!(
                "cpt of {owner} has {} entries, expected {}",
                table.len(),
                1usize << parents.len()
            )));
        }
        if let Some(p) = table.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidNet(format!("cpt of {owner} has entry {p} outside [0,1]")));
        }
        Ok(Cpt { owner, parents, table })
    }

    /// Row index for the parent values in `values` (indexed by variable).
    pub fn config_code(&self, values: &[bool]) -> usize {
        self.parents
            .iter()
            .enumerate()
            .fold(0, |code, (k, p)| code | ((values[p.index()] as usize) << k))
    }

    pub fn p_one(&self, values: &[bool]) -> f64 {
        self.table[self.config_code(values)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    dag: Dag,
    cpts: Vec<Cpt>,
    order: Vec<VariableId>,
}

impl BayesNet {
    pub fn new(dag: Dag, cpts: Vec<Cpt>) -> Result<Self> {
        if cpts.len() != dag.n_nodes() {
            return Err(Error::InvalidNet(format!(
                "{} cpts for {} nodes",
                cpts.len(),
                dag.n_nodes()
            )));
        }
        for (i, cpt) in cpts.iter().enumerate() {
            let v = VariableId::new(i);
            if cpt.owner != v {
                return Err(Error::InvalidNet(format!("cpt {i} is owned by {}", cpt.owner)));
            }
            if cpt.parents != dag.parents(v) {
                return Err(Error::InvalidNet(format!("cpt parents of {v} disagree with the graph")));
            }
        }
        let order = topological_order(&dag)?;
        Ok(BayesNet { dag, cpts, order })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn n_nodes(&self) -> usize {
        self.dag.n_nodes()
    }

    pub fn cpt(&self, v: VariableId) -> &Cpt {
        &self.cpts[v.index()]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn topological_order(&self) -> &[VariableId] {
        &self.order
    }

    pub fn check_variable(&self, v: VariableId) -> Result<()> {
        if v.index() < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(v.to_string()))
        }
    }

    /// Draws a full world into `values` (resized to the node count).
    pub fn sample_into(&self, rng: &mut SeededRng, values: &mut Vec<bool>) {
        values.clear();
        values.resize(self.n_nodes(), false);
        for &v in &self.order {
            let p = self.cpts[v.index()].p_one(values);
            values[v.index()] = rng.bernoulli(p);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Fills every CPT entry with an independent Beta(alpha, beta) draw,
/// visiting nodes in topological order.
pub fn assign_cpts(dag: Dag, alpha: f64, beta: f64, rng: &mut SeededRng) -> Result<BayesNet> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::param(format!("beta parameters must be positive, got ({alpha}, {beta})")));
    }
    let order = topological_order(&dag)?;
    let mut tables: Vec<Option<Vec<f64>>> = vec![None; dag.n_nodes()];
    for &v in &order {
        let rows = 1usize << dag.parents(v).len();
        tables[v.index()] = Some((0..rows).map(|_| sample_beta(alpha, beta, rng)).collect());
    }
    let cpts = tables
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let v = VariableId::new(i);
            Cpt::new(v, dag.parents(v).to_vec(), t.expect("every node visited"))
        })
        .collect::<Result<Vec<_>>>()?;
    BayesNet::new(dag, cpts)
}

pub fn sample_beta(alpha: f64, beta: f64, rng: &mut SeededRng) -> f64 {
    rng.beta(alpha, beta)
}

/// Partial assignment of bits to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<VariableId, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VariableId, value: bool) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VariableId) -> Option<bool> {
        self.values.get(&v).copied()
    }

    pub fn contains(&self, v: VariableId) -> bool {
        self.values.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VariableId, bool)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

impl FromIterator<(VariableId, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VariableId, bool)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

pub fn ancestral_sample(net: &BayesNet, rng: &mut SeededRng) -> Assignment {
    let mut values = Vec::new();
    net.sample_into(rng, &mut values);
    values
        .into_iter()
        .enumerate()
        .map(|(i, b)| (VariableId::new(i), b))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CptDocument {
    parents: Vec<VariableId>,
    table: Vec<f64>,
}

struct OrderedCpts(Vec<(VariableId, CptDocument)>);

impl Serialize for OrderedCpts {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (v, cpt) in &self.0 {
            map.serialize_entry(&v.to_string(), cpt)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedCpts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<VariableId, CptDocument>::deserialize(deserializer)?;
        Ok(OrderedCpts(map.into_iter().collect()))
    }
}

#[derive(Serialize, Deserialize)]
struct NetDocument {
    version: u32,
    n_nodes: usize,
    edges: Vec<[u32; 2]>,
    cpts: OrderedCpts,
}

impl From<&BayesNet> for NetDocument {
    fn from(net: &BayesNet) -> Self {
        NetDocument {
            version: NET_FORMAT_VERSION,
            n_nodes: net.n_nodes(),
            edges: net.dag.edges().into_iter().map(|(p, c)| [p.0, c.0]).collect(),
            cpts: OrderedCpts(
                net.cpts
                    .iter()
                    .map(|c| {
                        (
                            c.owner,
                            CptDocument {
                                parents: c.parents.clone(),
                                table: c.table.clone(),
                            },
                        )
                    })
                    .collect(),
            ),
        }
    }
}

impl TryFrom<NetDocument> for BayesNet {
    type Error = Error;

    fn try_from(doc: NetDocument) -> Result<Self> {
        if doc.version != NET_FORMAT_VERSION {
            return Err(Error::InvalidNet(format!("unsupported net format version {}", doc.version)));
        }
        let edges: Vec<_> = doc
            .edges
            .iter()
            .map(|[p, c]| (VariableId(*p), VariableId(*c)))
            .collect();
        let dag = Dag::from_edges(doc.n_nodes, &edges)?;
        if doc.cpts.0.len() != doc.n_nodes {
            return Err(Error::InvalidNet(format!(
                "{} cpts for {} nodes",
                doc.cpts.0.len(),
                doc.n_nodes
            )));
        }
        let cpts = doc
            .cpts
            .0
            .into_iter()
            .map(|(v, c)| Cpt::new(v, c.parents, c.table))
            .collect::<Result<Vec<_>>>()?;
        BayesNet::new(dag, cpts)
    }
}
