use std::collections::BTreeSet;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sample::{write_sample, Sample};
use crate::error::{Error, Result};
use crate::graph::{BayesNet, VariableId};
use crate::obsdist::{select_variables, ObservationSpec};
use crate::rng::SeededRng;

/// Samples per rng substream. Output never depends on the worker count.
pub const CHUNK_SIZE: usize = 4096;

/// Consecutive degenerate selections tolerated before giving up.
pub const MAX_DEGENERATE_DRAWS: usize = 10_000;

pub const CORPUS_FORMAT_VERSION: &str = "1";

/// Builds one sample: values of `subset` from a single ancestral world, in
/// a uniformly random order.
pub fn sample_from_subset(
    net: &BayesNet,
    subset: &BTreeSet<VariableId>,
    rng: &mut SeededRng,
    world: &mut Vec<bool>,
) -> Result<Sample> {
    net.sample_into(rng, world);
    let mut vars: Vec<VariableId> = subset.iter().copied().collect();
    rng.shuffle(&mut vars);
    Sample::new(vars.into_iter().map(|v| (v, world[v.index()])).collect())
}

/// Deterministic corpus generator over `(net, spec, seed)`.
///
/// Selections with fewer than `min_records` variables are redrawn.
#[derive(Debug, Clone)]
pub struct CorpusGenerator<'a> {
    net: &'a BayesNet,
    spec: &'a ObservationSpec,
    seed: u64,
    min_records: usize,
}

impl<'a> CorpusGenerator<'a> {
    pub fn new(net: &'a BayesNet, spec: &'a ObservationSpec, seed: u64) -> Result<Self> {
        spec.validate(net.n_nodes())?;
        Ok(CorpusGenerator {
            net,
            spec,
            seed,
            min_records: 2,
        })
    }

    pub fn with_min_records(mut self, min_records: usize) -> Self {
        self.min_records = min_records.max(1);
        self
    }

    fn chunk(&self, index: usize) -> Result<Vec<Sample>> {
        let mut rng = SeededRng::substream(self.seed, index as u64);
        let mut world = Vec::with_capacity(self.net.n_nodes());
        let mut out = Vec::with_capacity(CHUNK_SIZE);
        for _ in 0..CHUNK_SIZE {
            let mut misses = 0;
            let subset = loop {
                let s = select_variables(self.spec, &mut rng);
                if s.len() >= self.min_records {
                    break s;
                }
                misses += 1;
                if misses >= MAX_DEGENERATE_DRAWS {
                    return Err(Error::param(format!(
                        "observation distribution produced {misses} consecutive selections with fewer than {} variables",
                        self.min_records
                    )));
                }
            };
            out.push(sample_from_subset(self.net, &subset, &mut rng, &mut world)?);
        }
        Ok(out)
    }

    /// Samples with indices in `range`.
    pub fn range(&self, range: Range<usize>) -> Result<Vec<Sample>> {
        if range.is_empty() {
            return Ok(Vec::new());
        }
        let first = range.start / CHUNK_SIZE;
        let last = (range.end - 1) / CHUNK_SIZE;
        let chunks: Vec<Vec<Sample>> = (first..=last).into_par_iter().map(|c| self.chunk(c)).collect::<Result<_>>()?;
        let skip = range.start - first * CHUNK_SIZE;
        Ok(chunks.into_iter().flatten().skip(skip).take(range.len()).collect())
    }

    /// Streams serialized samples in `range` to `out`. `progress` receives
    /// the index one past the last sample written.
    pub fn write_range<W: Write>(
        &self,
        range: Range<usize>,
        out: &mut W,
        mut progress: impl FnMut(usize),
    ) -> Result<()> {
        let batch = CHUNK_SIZE * rayon::current_num_threads().max(1);
        let mut at = range.start;
        let mut text = String::new();
        while at < range.end {
            let stop = (at + batch).min(range.end);
            text.clear();
            for s in self.range(at..stop)? {
                write_sample(&s, &mut text);
            }
            out.write_all(text.as_bytes())?;
            at = stop;
            progress(at);
        }
        Ok(())
    }
}

/// The first `n_samples` samples of the corpus for `(net, spec, seed)`.
pub fn generate_corpus(net: &BayesNet, spec: &ObservationSpec, n_samples: usize, seed: u64) -> Result<Vec<Sample>> {
    CorpusGenerator::new(net, spec, seed)?.range(0..n_samples)
}

/// Single-pass counts over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_nodes: usize,
    pub samples: u64,
    pub records: u64,
    /// Length of the serialized text.
    pub characters: u64,
    pub variable_frequency: Vec<u64>,
    /// Row-major `n_nodes × n_nodes`, symmetric, zero diagonal.
    pub cooccurrence: Vec<u64>,
}

impl CorpusStats {
    pub fn new(n_nodes: usize) -> Self {
        CorpusStats {
            n_nodes,
            samples: 0,
            records: 0,
            characters: 0,
            variable_frequency: vec![0; n_nodes],
            cooccurrence: vec![0; n_nodes * n_nodes],
        }
    }

    pub fn add(&mut self, sample: &Sample) -> Result<()> {
        let n = self.n_nodes;
        if let Some((v, _)) = sample.records().iter().find(|(v, _)| v.index() >= n) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        self.samples += 1;
        self.records += sample.len() as u64;
        self.characters += serialized_len(sample) as u64;
        for (i, (a, _)) in sample.records().iter().enumerate() {
            self.variable_frequency[a.index()] += 1;
            for (b, _) in &sample.records()[i + 1..] {
                self.cooccurrence[a.index() * n + b.index()] += 1;
                self.cooccurrence[b.index() * n + a.index()] += 1;
            }
        }
        Ok(())
    }

    pub fn cooccurrences(&self, a: VariableId, b: VariableId) -> u64 {
        self.cooccurrence[a.index() * self.n_nodes + b.index()]
    }
}

pub fn corpus_stats<'a>(n_nodes: usize, samples: impl IntoIterator<Item = &'a Sample>) -> Result<CorpusStats> {
    let mut stats = CorpusStats::new(n_nodes);
    for s in samples {
        stats.add(s)?;
    }
    Ok(stats)
}

/// Number of characters `serialize_sample` would produce.
pub fn serialized_len(sample: &Sample) -> usize {
    let digits = |v: VariableId| v.0.checked_ilog10().unwrap_or(0) as usize + 1;
    // "###\n" + "target: X" + id + "\n", then "X" + id + "=b\n" per record
    4 + 9 + digits(sample.target()) + 1 + sample.records().iter().map(|(v, _)| 4 + digits(*v)).sum::<usize>()
}

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// JSON sidecar describing how a corpus was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub net_ref: String,
    pub spec: ObservationSpec,
    pub n_samples: usize,
    pub seed: u64,
    pub format_version: String,
}

impl CorpusManifest {
    pub fn new(net_bytes: &[u8], spec: ObservationSpec, n_samples: usize, seed: u64) -> Self {
        CorpusManifest {
            net_ref: content_hash(net_bytes),
            spec,
            n_samples,
            seed,
            format_version: CORPUS_FORMAT_VERSION.to_string(),
        }
    }

    pub fn verify_net(&self, net_bytes: &[u8]) -> Result<()> {
        let actual = content_hash(net_bytes);
        if actual == self.net_ref {
            Ok(())
        } else {
            Err(Error::HashMismatch {
                expected: self.net_ref.clone(),
                actual,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assign_cpts, generate_dag};
    use crate::infer::conditional;
    use crate::obsdist::{verify_exclusion, HeldOutPair, ObservationMode, RadiusDistribution};
    use crate::pipeline::sample::serialize_sample;
    use crate::Assignment;

    fn x(i: usize) -> VariableId {
        VariableId::new(i)
    }

    fn net(n: usize, e: usize, seed: u64) -> BayesNet {
        let dag = generate_dag(n, e, &mut SeededRng::new(seed)).unwrap();
        assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(seed + 1)).unwrap()
    }

    fn local_spec(net: &BayesNet, held_out: Vec<HeldOutPair>) -> ObservationSpec {
        ObservationSpec {
            mode: ObservationMode::Local,
            locality_graph: net.dag().clone(),
            radius: RadiusDistribution::geometric(0.5).unwrap(),
            dropout: 0.2,
            held_out,
        }
    }

    #[test]
    fn singleton_subset() {
        let net = net(8, 8, 3);
        let mut world = Vec::new();
        let s = sample_from_subset(&net, &BTreeSet::from([x(5)]), &mut SeededRng::new(0), &mut world).unwrap();
        assert_eq!(s.target(), x(5));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn ranges_agree_with_the_whole() {
        let net = net(10, 10, 1);
        let spec = local_spec(&net, vec![]);
        let g = CorpusGenerator::new(&net, &spec, 9).unwrap();
        let all = g.range(0..CHUNK_SIZE + 100).unwrap();
        assert_eq!(g.range(CHUNK_SIZE - 5..CHUNK_SIZE + 7).unwrap(), all[CHUNK_SIZE - 5..CHUNK_SIZE + 7]);
        assert!(all.iter().all(|s| s.len() >= 2));

        let mut streamed = Vec::new();
        let mut seen = 0;
        g.write_range(0..CHUNK_SIZE + 100, &mut streamed, |n| seen = n).unwrap();
        assert_eq!(seen, CHUNK_SIZE + 100);
        let joined: String = all.iter().map(serialize_sample).collect();
        assert_eq!(String::from_utf8(streamed).unwrap(), joined);
    }

    #[test]
    fn degenerate_spec_is_an_error() {
        let net = net(2, 1, 1);
        let spec = ObservationSpec {
            mode: ObservationMode::FullyObserved,
            locality_graph: net.dag().clone(),
            radius: RadiusDistribution::geometric(0.5).unwrap(),
            dropout: 0.0,
            held_out: vec![HeldOutPair::new(x(0), x(1), 0.0)],
        };
        assert!(generate_corpus(&net, &spec, 3, 0).is_err());
        let single = CorpusGenerator::new(&net, &spec, 0).unwrap().with_min_records(1).range(0..3).unwrap();
        assert!(single.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn adjacent_frequencies_match_exact_conditionals() {
        let net = net(12, 12, 21);
        let spec = local_spec(&net, vec![]);
        let corpus = generate_corpus(&net, &spec, 100_000, 5).unwrap();
        for (p, c) in net.dag().edges() {
            let mut counts = [[0u32; 2]; 2];
            for s in &corpus {
                let get = |v| s.records().iter().find(|r| r.0 == v).map(|r| r.1);
                if let (Some(vp), Some(vc)) = (get(p), get(c)) {
                    counts[vp as usize][vc as usize] += 1;
                }
            }
            for vp in [false, true] {
                let row = counts[vp as usize];
                let total = row[0] + row[1];
                if total < 2000 {
                    continue;
                }
                let freq = row[1] as f64 / total as f64;
                let exact = conditional(&net, c, true, &Assignment::from_iter([(p, vp)])).unwrap();
                assert!((freq - exact).abs() < 0.02, "{p}->{c} given {vp}: {freq} vs {exact}");
            }
        }
    }

    #[test]
    fn held_out_pairs_never_cooccur() {
        let net = net(20, 20, 4);
        let pairs = vec![HeldOutPair::new(x(0), x(7), 0.1), HeldOutPair::new(x(3), x(11), 0.1)];
        for mode in [ObservationMode::Local, ObservationMode::FullyObserved] {
            let spec = ObservationSpec {
                mode,
                ..local_spec(&net, pairs.clone())
            };
            let corpus = generate_corpus(&net, &spec, 20_000, 2).unwrap();
            let sets: Vec<BTreeSet<VariableId>> = corpus.iter().map(|s| s.records().iter().map(|r| r.0).collect()).collect();
            assert_eq!(verify_exclusion(&sets, &pairs), 0);
            let stats = corpus_stats(20, &corpus).unwrap();
            assert_eq!(stats.cooccurrences(x(0), x(7)), 0);
            assert_eq!(stats.cooccurrences(x(11), x(3)), 0);
        }
    }

    #[test]
    fn stats_by_hand() {
        assert_eq!(corpus_stats(3, []).unwrap(), CorpusStats::new(3));
        let s = Sample::new(vec![(x(2), true), (x(0), false)]).unwrap();
        let stats = corpus_stats(3, [&s]).unwrap();
        assert_eq!(stats.samples, 1);
        assert_eq!(stats.records, 2);
        assert_eq!(stats.characters, serialize_sample(&s).len() as u64);
        assert_eq!(stats.variable_frequency, vec![1, 0, 1]);
        assert_eq!(stats.cooccurrence, vec![0, 0, 1, 0, 0, 0, 1, 0, 0]);
        let wide = Sample::new(vec![(VariableId(12345), true)]).unwrap();
        assert_eq!(serialized_len(&wide), serialize_sample(&wide).len());
        assert!(corpus_stats(3, [&wide]).is_err());
    }

    #[test]
    fn manifest_hash() {
        let net = net(5, 4, 0);
        let bytes = net.to_json().unwrap();
        let m = CorpusManifest::new(bytes.as_bytes(), local_spec(&net, vec![]), 10, 1);
        m.verify_net(bytes.as_bytes()).unwrap();
        assert!(m.verify_net(b"other").is_err());
        let back: CorpusManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
