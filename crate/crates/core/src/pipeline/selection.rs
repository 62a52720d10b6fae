use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{assign_cpts, generate_dag, BayesNet, VariableId};
use crate::infer::mutual_information;
use crate::obsdist::HeldOutPair;
use crate::rng::SeededRng;

/// Shape of each candidate net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetParams {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams {
            n_nodes: 100,
            n_edges: 100,
            alpha: 0.2,
            beta: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionParams {
    pub n_candidates: usize,
    pub n_top_pairs: usize,
    pub n_holdout: usize,
    pub n_selected: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            n_candidates: 100,
            n_top_pairs: 50,
            n_holdout: 25,
            n_selected: 10,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 || self.n_selected == 0 || self.n_holdout == 0 {
            return Err(Error::param("selection counts must be positive"));
        }
        if self.n_holdout > self.n_top_pairs {
            return Err(Error::param("n_holdout exceeds n_top_pairs"));
        }
        if self.n_selected > self.n_candidates {
            return Err(Error::param("n_selected exceeds n_candidates"));
        }
        Ok(())
    }
}

/// A candidate net with its ranked pairs.
#[derive(Debug, Clone)]
pub struct CandidateNet {
    pub id: usize,
    pub net: BayesNet,
    /// Highest-MI non-adjacent pairs, MI descending.
    pub top_pairs: Vec<HeldOutPair>,
    /// Uniform subset of `top_pairs`, kept in MI order.
    pub held_out: Vec<HeldOutPair>,
    pub mean_held_out_mi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetScore {
    pub net_id: usize,
    pub mean_held_out_mi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub candidate_count: usize,
    pub top_pair_count: usize,
    pub holdout_count: usize,
    pub selected_net_count: usize,
    pub net_params: NetParams,
    /// Every candidate, in id order.
    pub per_net_mean_mi: Vec<NetScore>,
    /// Selected ids, mean held-out MI descending.
    pub chosen: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub report: SelectionReport,
    /// Selected nets, in the order of `report.chosen`.
    pub nets: Vec<CandidateNet>,
}

/// All non-adjacent pairs of `net` ranked by mutual information, descending;
/// ties by ascending ids.
pub fn ranked_pairs(net: &BayesNet) -> Result<Vec<HeldOutPair>> {
    let dag = net.dag();
    let n = net.n_nodes();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (a, b) = (VariableId::new(a), VariableId::new(b));
            if !dag.adjacent(a, b) {
                pairs.push(HeldOutPair::new(a, b, mutual_information(net, a, b)?));
            }
        }
    }
    pairs.sort_by(|p, q| q.mi.total_cmp(&p.mi).then((p.a, p.b).cmp(&(q.a, q.b))));
    Ok(pairs)
}

/// Candidate `id` is built from its own substream of `seed`.
pub fn candidate(id: usize, params: &SelectionParams, net_params: &NetParams, seed: u64) -> Result<CandidateNet> {
    let mut rng = SeededRng::substream(seed, id as u64);
    let dag = generate_dag(net_params.n_nodes, net_params.n_edges, &mut rng)?;
    let net = assign_cpts(dag, net_params.alpha, net_params.beta, &mut rng)?;
    let mut top_pairs = ranked_pairs(&net)?;
    top_pairs.truncate(params.n_top_pairs);
    if top_pairs.len() < params.n_holdout {
        return Err(Error::InsufficientVariables {
            needed: params.n_holdout,
            available: top_pairs.len(),
        });
    }
    let mut picks = rng.sample_indices(top_pairs.len(), params.n_holdout);
    picks.sort_unstable();
    let held_out: Vec<HeldOutPair> = picks.into_iter().map(|i| top_pairs[i]).collect();
    let mean_held_out_mi = held_out.iter().map(|p| p.mi).sum::<f64>() / held_out.len() as f64;
    Ok(CandidateNet {
        id,
        net,
        top_pairs,
        held_out,
        mean_held_out_mi,
    })
}

/// Generates candidates, holds out pairs, keeps the nets whose held-out
/// pairs have the highest mean mutual information.
pub fn select_nets_and_pairs(params: &SelectionParams, net_params: &NetParams, seed: u64) -> Result<Selection> {
    params.validate()?;
    let candidates: Vec<CandidateNet> = (0..params.n_candidates)
        .into_par_iter()
        .map(|id| candidate(id, params, net_params, seed))
        .collect::<Result<_>>()?;
    let per_net_mean_mi = candidates
        .iter()
        .map(|c| NetScore {
            net_id: c.id,
            mean_held_out_mi: c.mean_held_out_mi,
        })
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| candidates[j].mean_held_out_mi.total_cmp(&candidates[i].mean_held_out_mi).then(i.cmp(&j)));
    order.truncate(params.n_selected);
    let mut slots: Vec<Option<CandidateNet>> = candidates.into_iter().map(Some).collect();
    let nets: Vec<CandidateNet> = order.iter().map(|&i| slots[i].take().expect("distinct ids")).collect();
    Ok(Selection {
        report: SelectionReport {
            candidate_count: params.n_candidates,
            top_pair_count: params.n_top_pairs,
            holdout_count: params.n_holdout,
            selected_net_count: params.n_selected,
            net_params: *net_params,
            per_net_mean_mi,
            chosen: order,
        },
        nets,
    })
}

/// Long-format pair table: `net_id,a,b,mi,held_out` for every top pair of
/// every selected net.
pub fn write_pair_table<W: Write>(selection: &Selection, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["net_id", "a", "b", "mi", "held_out"])?;
    for c in &selection.nets {
        for p in &c.top_pairs {
            let held = c.held_out.iter().any(|h| (h.a, h.b) == (p.a, p.b));
            w.write_record([
                c.id.to_string(),
                p.a.to_string(),
                p.b.to_string(),
                p.mi.to_string(),
                held.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
