//! Locality-structured training corpora from random Bayes nets, conditional
//! probability estimators that reason through intermediate variables, and
//! numerical checks of the reasoning gap on directed chains.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod graph;
pub mod infer;
pub mod model;
pub mod obsdist;
pub mod pipeline;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{Assignment, BayesNet, Dag, VariableId};
pub use rng::SeededRng;
