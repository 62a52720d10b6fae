//! Direct, scaffolded and negative-scaffolded estimates with the exact
//! backend as the sample count grows.

use locality_lab::estimators::{build_scaffold, direct, negative_scaffold, scaffolded, Query};
use locality_lab::graph::{assign_cpts, generate_dag};
use locality_lab::infer::conditional;
use locality_lab::model::OracleModel;
use locality_lab::pipeline::ranked_pairs;
use locality_lab::{Assignment, SeededRng};

fn main() -> locality_lab::Result<()> {
    let net = assign_cpts(generate_dag(15, 18, &mut SeededRng::new(21))?, 0.2, 0.2, &mut SeededRng::new(22))?;
    let pair = ranked_pairs(&net)?[0];
    let oracle = OracleModel::new(net.clone());
    let query = Query::new(pair.a, true, pair.b, true)?;
    let mut evidence = Assignment::new();
    evidence.insert(pair.a, true);
    let truth = conditional(&net, pair.b, true, &evidence)?;
    let plan = build_scaffold(net.dag(), &query)?;
    let negative = negative_scaffold(net.dag(), &plan, &query, &mut SeededRng::new(1))?;
    println!("p({}=1 | {}=1) = {truth:.5}; direct {:.5}", pair.b, pair.a, direct(&oracle, &query)?);
    let names = |vs: &[locality_lab::VariableId]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    println!("scaffold [{}], negative [{}]", names(plan.vars()), names(negative.vars()));
    for m in [1, 10, 100, 1000, 10_000] {
        let s = scaffolded(&oracle, &query, &plan, m, &mut SeededRng::substream(5, m as u64))?;
        let n = scaffolded(&oracle, &query, &negative, m, &mut SeededRng::substream(6, m as u64))?;
        println!("M={m:>5}  scaffolded {:.5} (err {:.1e})  negative {:.5}", s.value, (s.value - truth).abs(), n.value);
    }
    Ok(())
}
