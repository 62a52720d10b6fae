//! A local-condition corpus: observation draws, the text format, per-variable
//! frequencies and the held-out exclusion check.

use std::collections::BTreeSet;

use locality_lab::obsdist::{spec_for_condition, verify_exclusion, ObservationMode, RadiusChoice};
use locality_lab::pipeline::{corpus_stats, select_nets_and_pairs, serialize_sample, CorpusGenerator, NetParams, SelectionParams};

fn main() -> locality_lab::Result<()> {
    let net_params = NetParams { n_nodes: 20, n_edges: 20, ..Default::default() };
    let selection = SelectionParams { n_candidates: 4, n_top_pairs: 10, n_holdout: 5, n_selected: 1 };
    let chosen = select_nets_and_pairs(&selection, &net_params, 3)?;
    let c = &chosen.nets[0];
    let spec = spec_for_condition(&c.net, ObservationMode::Local, RadiusChoice::Zipf { s: 2.0 }, 0.2, c.held_out.clone(), 1)?;
    let samples = CorpusGenerator::new(&c.net, &spec, 9)?.range(0..20_000)?;
    for s in samples.iter().take(2) {
        print!("{}", serialize_sample(s));
    }
    let stats = corpus_stats(20, &samples)?;
    println!(
        "{} samples, {:.2} records each, {} characters",
        stats.samples,
        stats.records as f64 / stats.samples as f64,
        stats.characters
    );
    println!("variable frequency {:?}", stats.variable_frequency);
    let sets: Vec<BTreeSet<_>> = samples.iter().map(|s| s.records().iter().map(|r| r.0).collect()).collect();
    for p in &c.held_out {
        println!("held out {} {} (mi {:.4}): {} co-occurrences", p.a, p.b, p.mi, stats.cooccurrences(p.a, p.b));
    }
    assert_eq!(verify_exclusion(&sets, &c.held_out), 0);
    Ok(())
}
