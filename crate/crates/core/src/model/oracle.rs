use std::collections::HashMap;
use std::sync::RwLock;

use super::{check_query, NextVariableDistribution, PromptState, SequenceModel, ValueDistribution};
use crate::error::{Error, Result};
use crate::graph::{Assignment, BayesNet, VariableId};
use crate::infer::conditional;

const CACHE_LIMIT: usize = 1 << 20;

type Key = (Vec<(u32, bool)>, u32);

/// Exact conditionals of the generating net, conditioning on the whole
/// context. Memoized, since estimators revisit the same contexts often.
#[derive(Debug)]
pub struct OracleModel {
    net: BayesNet,
    cache: RwLock<HashMap<Key, f64>>,
}

impl OracleModel {
    pub fn new(net: BayesNet) -> Self {
        OracleModel {
            net,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn net(&self) -> &BayesNet {
        &self.net
    }
}

impl SequenceModel for OracleModel {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        self.net.check_variable(query)?;
        check_query(state, query)?;
        let mut evidence: Vec<(u32, bool)> = state.context().iter().map(|(v, b)| (v.0, *b)).collect();
        evidence.sort_unstable();
        let key = (evidence, query.0);
        if let Some(p) = self.cache.read().expect("cache lock").get(&key) {
            return ValueDistribution::new(*p);
        }
        for (v, _) in state.context() {
            self.net.check_variable(*v)?;
        }
        let assignment: Assignment = state.context().iter().copied().collect();
        let p = conditional(&self.net, query, true, &assignment)?.clamp(0.0, 1.0);
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, p);
        ValueDistribution::new(p)
    }

    fn next_variable_distribution(&self, _state: &PromptState) -> Result<NextVariableDistribution> {
        Err(Error::UnsupportedOperation("next_var on the oracle backend"))
    }
}
