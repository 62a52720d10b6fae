//! Pairwise mutual information and the ranking used to pick held-out pairs.

use locality_lab::graph::{assign_cpts, generate_dag};
use locality_lab::infer::{mutual_information, pairwise_joint};
use locality_lab::pipeline::ranked_pairs;
use locality_lab::SeededRng;

fn main() -> locality_lab::Result<()> {
    let net = assign_cpts(generate_dag(20, 20, &mut SeededRng::new(11))?, 0.2, 0.2, &mut SeededRng::new(12))?;
    let ranked = ranked_pairs(&net)?;
    println!("{} non-adjacent pairs; top 8 by MI (nats):", ranked.len());
    for p in ranked.iter().take(8) {
        let joint = pairwise_joint(&net, p.a, p.b)?;
        println!("  {} {}  mi {:.5}  joint {:?}", p.a, p.b, p.mi, joint.table.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
        assert!((mutual_information(&net, p.a, p.b)? - p.mi).abs() < 1e-12);
    }
    Ok(())
}
