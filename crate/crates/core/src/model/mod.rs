//! The conditional model `q` queried by the estimators.
//!
//! Backends: [`OracleModel`] (exact inference on the generating net),
//! [`EmpiricalBackoffModel`] (counts learned from a corpus) and
//! [`RemoteModel`] (newline-delimited JSON over TCP or a child process).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::VariableId;
use crate::rng::SeededRng;

mod empirical;
mod oracle;
mod remote;

pub use empirical::{fit_empirical, EmpiricalBackoffModel, DEFAULT_ALPHA, DEFAULT_TAU};
pub use oracle::OracleModel;
pub use remote::{serve, Request, RemoteModel, DEFAULT_TIMEOUT};

/// A prompt: the declared target plus the records emitted so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptState {
    target: VariableId,
    context: Vec<(VariableId, bool)>,
}

impl PromptState {
    pub fn new(target: VariableId, context: Vec<(VariableId, bool)>) -> Result<Self> {
        let mut state = PromptState {
            target,
            context: Vec::with_capacity(context.len()),
        };
        for (v, b) in context {
            state.push(v, b)?;
        }
        Ok(state)
    }

    pub fn push(&mut self, v: VariableId, value: bool) -> Result<()> {
        if v == self.target {
            return Err(Error::param(format!("target {v} cannot appear in the context")));
        }
        if self.contains(v) {
            return Err(Error::param(format!("{v} is already in the context")));
        }
        self.context.push((v, value));
        Ok(())
    }

    pub fn target(&self) -> VariableId {
        self.target
    }

    pub fn context(&self) -> &[(VariableId, bool)] {
        &self.context
    }

    pub fn last(&self) -> Option<(VariableId, bool)> {
        self.context.last().copied()
    }

    pub fn contains(&self, v: VariableId) -> bool {
        self.context.iter().any(|(c, _)| *c == v)
    }

    /// Text prompt ending right before the value of `query`.
    pub fn render(&self, query: VariableId) -> String {
        let mut out = format!("target: {}\n", self.target);
        for (v, b) in &self.context {
            out.push_str(&format!("{v}={}\n", *b as u8));
        }
        out.push_str(&format!("{query}="));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueDistribution {
    pub p1: f64,
}

impl ValueDistribution {
    pub fn new(p1: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p1) {
            Ok(ValueDistribution { p1 })
        } else {
            Err(Error::param(format!("p1 = {p1} is not a probability")))
        }
    }

    pub fn prob(&self, value: bool) -> f64 {
        if value {
            self.p1
        } else {
            1.0 - self.p1
        }
    }
}

/// Distribution over the next variable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NextVariableDistribution {
    probs: BTreeMap<VariableId, f64>,
}

impl NextVariableDistribution {
    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: BTreeMap<VariableId, f64>) -> Result<Self> {
        let total: f64 = weights.values().sum();
        if weights.values().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 || !total.is_finite() {
            return Err(Error::param("next-variable weights must be nonnegative with a positive sum"));
        }
        Ok(NextVariableDistribution {
            probs: weights.into_iter().map(|(v, w)| (v, w / total)).collect(),
        })
    }

    pub fn probs(&self) -> &BTreeMap<VariableId, f64> {
        &self.probs
    }

    pub fn prob(&self, v: VariableId) -> f64 {
        self.probs.get(&v).copied().unwrap_or(0.0)
    }

    pub fn sample(&self, rng: &mut SeededRng) -> VariableId {
        let weights: Vec<f64> = self.probs.values().copied().collect();
        let i = rng.categorical(&weights);
        *self.probs.keys().nth(i).expect("categorical index in range")
    }
}

/// An autoregressive model over the sample format.
pub trait SequenceModel: Sync {
    /// Distribution of the value of `query` written next.
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution>;

    /// Distribution of the next identifier.
    fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution>;
}

impl<M: SequenceModel + ?Sized> SequenceModel for &M {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        (**self).value_distribution(state, query)
    }

    fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
        (**self).next_variable_distribution(state)
    }
}

impl<M: SequenceModel + ?Sized + Send> SequenceModel for Box<M> {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        (**self).value_distribution(state, query)
    }

    fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
        (**self).next_variable_distribution(state)
    }
}

pub(crate) fn check_query(state: &PromptState, query: VariableId) -> Result<()> {
    if state.contains(query) {
        return Err(Error::param(format!("{query} already has a value in the context")));
    }
    Ok(())
}
