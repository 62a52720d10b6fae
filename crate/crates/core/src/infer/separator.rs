use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Dag, VariableId};

/// Minimum-cardinality d-separator of non-adjacent `a` and `b`, ascending.
///
/// Computed as a minimum vertex cut between `a` and `b` in the moral graph
/// of their ancestral set, using unit-capacity max-flow on the split-node
/// network. Among all minimum cuts the lexicographically smallest id
/// sequence is returned.
pub fn minimal_d_separator(dag: &Dag, a: VariableId, b: VariableId) -> Result<Vec<VariableId>> {
    if a == b || dag.adjacent(a, b) {
        return Err(Error::Adjacent(a, b));
    }
    let n = dag.n_nodes();
    let (adj, keep) = moral_ancestral_graph(dag, a, b);
    let flow = VertexCut {
        adj: &adj,
        source: a.index(),
        sink: b.index(),
    };
    let mut removed = vec![false; n];
    let k = flow.size(&removed);
    let mut chosen = Vec::with_capacity(k);
    for v in (0..n).filter(|&v| keep[v] && v != a.index() && v != b.index()) {
        if chosen.len() == k {
            break;
        }
        removed[v] = true;
        if flow.size(&removed) == k - chosen.len() - 1 {
            chosen.push(VariableId::new(v));
        } else {
            removed[v] = false;
        }
    }
    debug_assert_eq!(chosen.len(), k);
    Ok(chosen)
}

/// Every variable on some simple path between non-adjacent `a` and `b` in
/// the moral graph of their ancestral set, ascending.
///
/// Removing this set leaves no path, so it d-separates `a` from `b`; on a
/// chain it is exactly the variables strictly between the endpoints.
pub fn path_interior(dag: &Dag, a: VariableId, b: VariableId) -> Result<Vec<VariableId>> {
    if a == b || dag.adjacent(a, b) {
        return Err(Error::Adjacent(a, b));
    }
    let n = dag.n_nodes();
    let (adj, keep) = moral_ancestral_graph(dag, a, b);
    let mut out = Vec::new();
    for v in (0..n).filter(|&v| keep[v] && v != a.index() && v != b.index()) {
        // two vertex-disjoint paths, v..a and v..b
        let sink = 2 * n;
        let mut graph = FlowGraph::new(2 * n + 1);
        for u in (0..n).filter(|&u| keep[u]) {
            if u != a.index() && u != b.index() {
                graph.add_edge(2 * u, 2 * u + 1, if u == v { 2 } else { 1 });
                for &w in &adj[u] {
                    graph.add_edge(2 * u + 1, 2 * w, 1);
                }
            }
        }
        graph.add_edge(2 * a.index(), sink, 1);
        graph.add_edge(2 * b.index(), sink, 1);
        if graph.max_flow(2 * v, sink) == 2 {
            out.push(VariableId::new(v));
        }
    }
    Ok(out)
}

/// Moral graph restricted to the ancestral closure of `{a, b}`, plus the
/// membership mask of that closure.
fn moral_ancestral_graph(dag: &Dag, a: VariableId, b: VariableId) -> (Vec<Vec<usize>>, Vec<bool>) {
    let keep = dag.ancestral_closure([a, b]);
    let mut adj = vec![Vec::new(); dag.n_nodes()];
    let mut link = |u: VariableId, v: VariableId| {
        if !adj[u.index()].contains(&v.index()) {
            adj[u.index()].push(v.index());
            adj[v.index()].push(u.index());
        }
    };
    for v in dag.nodes().filter(|v| keep[v.index()]) {
        let ps = dag.parents(v);
        for (i, &p) in ps.iter().enumerate() {
            link(p, v);
            for &q in &ps[i + 1..] {
                link(p, q);
            }
        }
    }
    (adj, keep)
}

struct VertexCut<'a> {
    adj: &'a [Vec<usize>],
    source: usize,
    sink: usize,
}

impl VertexCut<'_> {
    /// Max number of vertex-disjoint source-sink paths avoiding `removed`.
    fn size(&self, removed: &[bool]) -> usize {
        let n = self.adj.len();
        // node v splits into in = 2v and out = 2v + 1
        let mut graph = FlowGraph::new(2 * n);
        const INF: i32 = i32::MAX / 2;
        for v in 0..n {
            if removed[v] {
                continue;
            }
            let cap = if v == self.source || v == self.sink { INF } else { 1 };
            graph.add_edge(2 * v, 2 * v + 1, cap);
            for &w in &self.adj[v] {
                if !removed[w] {
                    graph.add_edge(2 * v + 1, 2 * w, INF);
                }
            }
        }
        graph.max_flow(2 * self.source + 1, 2 * self.sink) as usize
    }
}

struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i32>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i32) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Edmonds–Karp.
    fn max_flow(&mut self, s: usize, t: usize) -> i32 {
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; self.head.len()];
            let mut queue = VecDeque::from([s]);
            let mut reached = false;
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && via[v] == usize::MAX && v != s {
                        via[v] = e;
                        if v == t {
                            reached = true;
                            break;
                        }
                        queue.push_back(v);
                    }
                }
                if reached {
                    break;
                }
            }
            if !reached {
                return total;
            }
            let mut bottleneck = i32::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
    }
}
