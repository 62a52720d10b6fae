//! Scaffold plans: the smallest d-separating set from a max-flow cut, and
//! the variables on paths between the pair.

use locality_lab::estimators::{build_scaffold_with, Query, ScaffoldKind};
use locality_lab::graph::generate_dag;
use locality_lab::infer::{d_separated, minimal_d_separator, path_interior};
use locality_lab::SeededRng;

fn main() -> locality_lab::Result<()> {
    let dag = generate_dag(20, 24, &mut SeededRng::new(7))?;
    let mut shown = 0;
    for a in dag.nodes() {
        for b in dag.nodes().filter(|b| *b > a && !dag.adjacent(a, *b)) {
            let cut = minimal_d_separator(&dag, a, b)?;
            if cut.is_empty() || shown == 5 {
                continue;
            }
            shown += 1;
            let between = path_interior(&dag, a, b)?;
            let query = Query::new(a, true, b, true)?;
            let plan = build_scaffold_with(&dag, &query, ScaffoldKind::Minimal)?;
            println!(
                "{a} ~ {b}: minimal {:?} (separates: {}), between {} variables, plan {:?}",
                cut.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                d_separated(&dag, a, b, &cut),
                between.len(),
                plan.vars().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            );
        }
    }
    Ok(())
}
