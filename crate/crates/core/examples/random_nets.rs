//! Random DAGs with Beta-distributed CPTs, JSON round-trip and ancestral
//! sampling.

use locality_lab::graph::{ancestral_sample, assign_cpts, generate_dag};
use locality_lab::{BayesNet, SeededRng};

fn main() -> locality_lab::Result<()> {
    let dag = generate_dag(12, 14, &mut SeededRng::new(1))?;
    println!("{} nodes, {} edges, undirected diameter {}", dag.n_nodes(), dag.n_edges(), dag.undirected_diameter());
    for (p, c) in dag.edges() {
        print!("{p}->{c} ");
    }
    println!();

    let net = assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(2))?;
    for cpt in net.cpts().iter().take(4) {
        let parents: Vec<String> = cpt.parents.iter().map(|p| p.to_string()).collect();
        println!("{} | [{}]: {:?}", cpt.owner, parents.join(", "), cpt.table);
    }

    let json = net.to_json()?;
    assert_eq!(BayesNet::from_json(&json)?, net);
    println!("json round-trip ok ({} bytes)", json.len());

    let mut rng = SeededRng::new(3);
    for _ in 0..3 {
        let world = ancestral_sample(&net, &mut rng);
        let bits: String = world.iter().map(|(_, v)| if v { '1' } else { '0' }).collect();
        println!("world {bits}");
    }
    Ok(())
}
