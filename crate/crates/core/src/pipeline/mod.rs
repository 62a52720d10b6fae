//! Candidate nets, held-out pair selection, corpus generation and the
//! plain-text sample format.
//!
//! A corpus is a concatenation of blocks:
//!
//! ```text
//! ###
//! target: X5
//! X17=0
//! X5=1
//! ```

mod corpus;
mod sample;
mod selection;

pub use corpus::{
    content_hash, corpus_stats, generate_corpus, sample_from_subset, serialized_len, CorpusGenerator, CorpusManifest,
    CorpusStats, CHUNK_SIZE, CORPUS_FORMAT_VERSION, MAX_DEGENERATE_DRAWS,
};
pub use sample::{parse_corpus, parse_sample, serialize_sample, write_sample, CorpusReader, Sample, SAMPLE_HEADER};
pub use selection::{
    candidate, ranked_pairs, select_nets_and_pairs, write_pair_table, CandidateNet, NetParams, NetScore, Selection,
    SelectionParams, SelectionReport,
};
