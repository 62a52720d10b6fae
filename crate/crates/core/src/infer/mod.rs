//! Exact inference on binary Bayes nets.
//!
//! Variable elimination with a min-fill ordering is the ground truth for
//! every evaluation in the crate. [`brute_force_joint`] exists as an
//! independent oracle for small nets.

mod dsep;
mod factor;
mod separator;

pub use dsep::d_separated;
pub use factor::Factor;
pub use separator::{minimal_d_separator, path_interior};

use crate::error::{Error, Result};
use crate::graph::{Assignment, BayesNet, VariableId};

/// Largest net [`brute_force_joint`] will enumerate.
pub const MAX_ENUMERATION_NODES: usize = 20;

/// Elimination orderings for hidden variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    /// Greedy minimum fill-in over the current interaction graph, ties by id.
    #[default]
    MinFill,
    /// Ascending variable id.
    Ascending,
}

/// Unnormalized factor over `query` proportional to `p(query, evidence)`.
pub fn eliminate(net: &BayesNet, query: &[VariableId], evidence: &Assignment) -> Result<Factor> {
    eliminate_with(net, query, evidence, EliminationOrder::MinFill)
}

pub fn eliminate_with(
    net: &BayesNet,
    query: &[VariableId],
    evidence: &Assignment,
    order: EliminationOrder,
) -> Result<Factor> {
    for &v in query {
        net.check_variable(v)?;
        if evidence.contains(v) {
            return Err(Error::param(format!("{v} is both queried and observed")));
        }
    }
    for (v, _) in evidence.iter() {
        net.check_variable(v)?;
    }

    // Non-ancestors of the query and evidence sum out to one.
    let relevant = net
        .dag()
        .ancestral_closure(query.iter().copied().chain(evidence.iter().map(|(v, _)| v)));
    let mut factors: Vec<Factor> = net
        .cpts()
        .iter()
        .filter(|c| relevant[c.owner.index()])
        .map(|c| Factor::from_cpt(c).reduce(evidence))
        .collect();
    let mut hidden: Vec<VariableId> = net
        .dag()
        .nodes()
        .filter(|v| relevant[v.index()] && !query.contains(v) && !evidence.contains(*v))
        .collect();

    while !hidden.is_empty() {
        let pick = match order {
            EliminationOrder::Ascending => 0,
            EliminationOrder::MinFill => min_fill_choice(&factors, &hidden),
        };
        let var = hidden.remove(pick);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        if let Some(product) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(product.sum_out(var));
        }
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::constant(1.0));
    let total: f64 = result.table.iter().sum();
    if total <= 0.0 || result.ln_total() < (1e-300f64).ln() {
        return Err(Error::ZeroProbabilityEvidence);
    }
    Ok(result)
}

fn min_fill_choice(factors: &[Factor], hidden: &[VariableId]) -> usize {
    let connected = |a: VariableId, b: VariableId| factors.iter().any(|f| f.contains(a) && f.contains(b));
    let mut best = (usize::MAX, 0);
    for (i, &v) in hidden.iter().enumerate() {
        let mut nbrs: Vec<VariableId> = factors
            .iter()
            .filter(|f| f.contains(v))
            .flat_map(|f| f.scope.iter().copied())
            .filter(|&w| w != v)
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let mut fill = 0;
        for a in 0..nbrs.len() {
            for b in a + 1..nbrs.len() {
                if !connected(nbrs[a], nbrs[b]) {
                    fill += 1;
                }
            }
        }
        if fill < best.0 {
            best = (fill, i);
            if fill == 0 {
                break;
            }
        }
    }
    best.1
}

/// `p(target = value | evidence)`.
pub fn conditional(net: &BayesNet, target: VariableId, value: bool, evidence: &Assignment) -> Result<f64> {
    let factor = eliminate(net, &[target], evidence)?.normalized();
    Ok(factor.table[value as usize])
}

/// `p(var = 1)`.
pub fn marginal(net: &BayesNet, var: VariableId) -> Result<f64> {
    conditional(net, var, true, &Assignment::new())
}

/// Normalized joint over `{a, b}`, scope ascending.
pub fn pairwise_joint(net: &BayesNet, a: VariableId, b: VariableId) -> Result<Factor> {
    if a == b {
        return Err(Error::param(format!("pairwise joint needs two distinct variables, got {a} twice")));
    }
    let mut scope = [a, b];
    scope.sort_unstable();
    Ok(eliminate(net, &scope, &Assignment::new())?.normalized())
}

/// Mutual information in nats, with `0 ln 0 = 0`.
pub fn mutual_information(net: &BayesNet, a: VariableId, b: VariableId) -> Result<f64> {
    let joint = pairwise_joint(net, a, b)?;
    Ok(mutual_information_2x2(&joint.table))
}

/// MI of a 2x2 joint laid out little-endian (`table[x + 2y]`).
pub fn mutual_information_2x2(table: &[f64]) -> f64 {
    let px = [table[0] + table[2], table[1] + table[3]];
    let py = [table[0] + table[1], table[2] + table[3]];
    let mut mi = 0.0;
    for y in 0..2 {
        for x in 0..2 {
            let pxy = table[x + 2 * y];
            if pxy > 0.0 {
                mi += pxy * (pxy / (px[x] * py[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Exhaustive joint over all variables from the factorization.
pub fn brute_force_joint(net: &BayesNet) -> Result<Factor> {
    let n = net.n_nodes();
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::TooLarge(n));
    }
    let mut values = vec![false; n];
    let table = (0..1usize << n)
        .map(|code| {
            for (i, v) in values.iter_mut().enumerate() {
                *v = (code >> i) & 1 == 1;
            }
            net.cpts()
                .iter()
                .map(|cpt| {
                    let p = cpt.p_one(&values);
                    if values[cpt.owner.index()] {
                        p
                    } else {
                        1.0 - p
                    }
                })
                .product()
        })
        .collect();
    Ok(Factor::new(net.dag().nodes().collect(), table))
}
