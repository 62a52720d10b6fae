use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimators::{ScaffoldKind, DEFAULT_M};
use crate::eval::{EstimatorKind, DEFAULT_RESAMPLES};
use crate::model::{DEFAULT_ALPHA, DEFAULT_TAU};
use crate::obsdist::{ObservationMode, RadiusChoice};
use crate::pipeline::{NetParams, SelectionParams};
use crate::theory::Formulation;

/// Starting point that a config file is layered over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 100-node nets, 10 selected nets, 10^6 samples.
    #[default]
    Full,
    /// 20-node nets, 2 selected nets, 10^5 samples.
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    pub mode: ObservationMode,
    pub radius: RadiusChoice,
    pub dropout: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            mode: ObservationMode::Local,
            radius: RadiusChoice::Geometric { p: 0.5 },
            dropout: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub n_samples: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { n_samples: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// `oracle`, `empirical` or `remote:<host:port>`.
    pub backend: String,
    pub estimators: Vec<EstimatorKind>,
    pub m: usize,
    pub max_steps: Option<usize>,
    pub scaffold_kind: ScaffoldKind,
    pub resamples: usize,
    /// Character budgets for a learning curve; empty evaluates the full corpus.
    pub budget_tokens: Vec<u64>,
    /// Sample counts to sweep; empty uses `m` alone.
    pub m_samples: Vec<usize>,
    pub format: OutputFormat,
    pub timeout_secs: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            backend: "empirical".to_string(),
            estimators: EstimatorKind::ALL.to_vec(),
            m: DEFAULT_M,
            max_steps: None,
            scaffold_kind: ScaffoldKind::default(),
            resamples: DEFAULT_RESAMPLES,
            budget_tokens: Vec::new(),
            m_samples: Vec::new(),
            format: OutputFormat::Csv,
            timeout_secs: crate::model::DEFAULT_TIMEOUT.as_secs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalConfig {
    pub alpha: f64,
    pub tau: u64,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        EmpiricalConfig {
            alpha: DEFAULT_ALPHA,
            tau: DEFAULT_TAU,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FormulationChoice {
    MarginalMixture,
    UniformMixture,
    #[default]
    Both,
}

impl FormulationChoice {
    pub fn formulations(self) -> Vec<Formulation> {
        match self {
            FormulationChoice::MarginalMixture => vec![Formulation::MarginalMixture],
            FormulationChoice::UniformMixture => vec![Formulation::UniformMixture],
            FormulationChoice::Both => vec![Formulation::MarginalMixture, Formulation::UniformMixture],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    pub n: usize,
    pub arity: usize,
    pub n_chains: usize,
    pub formulation: FormulationChoice,
    pub uniform_weight: f64,
    pub doubly_stochastic: bool,
    pub kl_tolerance: f64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            n: 10,
            arity: 2,
            n_chains: 200,
            formulation: FormulationChoice::Both,
            uniform_weight: 1.0,
            doubly_stochastic: true,
            kl_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub net: NetParams,
    pub selection: SelectionParams,
    pub observation: ObservationConfig,
    pub corpus: CorpusConfig,
    pub eval: EvalConfig,
    pub empirical: EmpiricalConfig,
    pub theory: TheoryConfig,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            net: NetParams::default(),
            selection: SelectionParams::default(),
            observation: ObservationConfig::default(),
            corpus: CorpusConfig::default(),
            eval: EvalConfig::default(),
            empirical: EmpiricalConfig::default(),
            theory: TheoryConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        // a tagged variant replaces the old one wholesale
        (Value::Object(b), Value::Object(p)) if !p.contains_key("kind") => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Full => RunConfig::default(),
            Preset::Desk => RunConfig {
                net: NetParams {
                    n_nodes: 20,
                    n_edges: 20,
                    ..NetParams::default()
                },
                selection: SelectionParams {
                    n_candidates: 10,
                    n_top_pairs: 10,
                    n_holdout: 5,
                    n_selected: 2,
                },
                corpus: CorpusConfig { n_samples: 100_000 },
                ..RunConfig::default()
            },
        }
    }

    /// Layers a JSON document over `preset`. Objects merge key by key;
    /// unknown keys are rejected.
    pub fn from_json_over(preset: Preset, text: &str) -> Result<Self> {
        let patch: Value = serde_json::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        if !patch.is_object() {
            return Err(Error::config("<file>", "top level must be an object"));
        }
        let mut base = serde_json::to_value(RunConfig::preset(preset))?;
        merge(&mut base, patch);
        serde_json::from_value(base).map_err(|e| Error::config("<file>", e.to_string()))
    }

    pub fn load(preset: Preset, path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::preset(preset)),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?;
                RunConfig::from_json_over(preset, &text)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| if ok { Ok(()) } else { Err(Error::config(field, msg)) };
        let n = self.net.n_nodes;
        check(n >= 2, "net.n_nodes", "must be at least 2")?;
        check(self.net.n_edges >= 1, "net.n_edges", "must be positive")?;
        check(self.net.n_edges <= n * (n - 1) / 2, "net.n_edges", "exceeds n_nodes * (n_nodes - 1) / 2")?;
        check(self.net.alpha > 0.0 && self.net.alpha.is_finite(), "net.alpha", "must be positive")?;
        check(self.net.beta > 0.0 && self.net.beta.is_finite(), "net.beta", "must be positive")?;
        let s = &self.selection;
        check(s.n_candidates > 0, "selection.n_candidates", "must be positive")?;
        check(s.n_top_pairs > 0, "selection.n_top_pairs", "must be positive")?;
        check(s.n_holdout > 0, "selection.n_holdout", "must be positive")?;
        check(s.n_selected > 0, "selection.n_selected", "must be positive")?;
        check(s.n_holdout <= s.n_top_pairs, "selection.n_holdout", "exceeds n_top_pairs")?;
        check(s.n_selected <= s.n_candidates, "selection.n_selected", "exceeds n_candidates")?;
        check(s.n_top_pairs <= n * (n - 1) / 2, "selection.n_top_pairs", "exceeds the number of variable pairs")?;
        let o = &self.observation;
        check((0.0..1.0).contains(&o.dropout), "observation.dropout", "must lie in [0, 1)")?;
        match o.radius {
            RadiusChoice::Geometric { p } => check(p > 0.0 && p <= 1.0, "observation.radius.p", "must lie in (0, 1]")?,
            RadiusChoice::Zipf { s } => check(s > 0.0 && s.is_finite(), "observation.radius.s", "must be positive")?,
        }
        check(self.corpus.n_samples > 0, "corpus.n_samples", "must be positive")?;
        let e = &self.eval;
        crate::cli::Backend::parse(&e.backend).map_err(|_| Error::config("eval.backend", "expected oracle, empirical or remote:<address>"))?;
        check(!e.estimators.is_empty(), "eval.estimators", "must not be empty")?;
        check(e.m > 0, "eval.m", "must be positive")?;
        check(e.max_steps != Some(0), "eval.max_steps", "must be positive")?;
        check(!e.m_samples.contains(&0), "eval.m_samples", "entries must be positive")?;
        check(e.budget_tokens.windows(2).all(|w| w[0] < w[1]), "eval.budget_tokens", "must be strictly ascending")?;
        check(e.timeout_secs > 0, "eval.timeout_secs", "must be positive")?;
        check(self.empirical.alpha > 0.0 && self.empirical.alpha.is_finite(), "empirical.alpha", "must be positive")?;
        let t = &self.theory;
        check(t.n >= 3, "theory.n", "must be at least 3")?;
        check(t.arity >= 2, "theory.arity", "must be at least 2")?;
        check(t.n_chains > 0, "theory.n_chains", "must be positive")?;
        check(t.uniform_weight >= 0.0 && t.uniform_weight.is_finite(), "theory.uniform_weight", "must be nonnegative")?;
        check(t.kl_tolerance >= 0.0, "theory.kl_tolerance", "must be nonnegative")?;
        check(!self.out.as_os_str().is_empty(), "out", "must not be empty")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for p in [Preset::Full, Preset::Desk] {
            let c = RunConfig::preset(p);
            c.validate().unwrap();
            assert_eq!(RunConfig::from_json_over(Preset::Full, &c.to_json().unwrap()).unwrap(), c);
        }
    }

    #[test]
    fn partial_file_layers_over_preset() {
        let c = RunConfig::from_json_over(Preset::Desk, r#"{"seed": 9, "net": {"n_edges": 25}}"#).unwrap();
        assert_eq!((c.seed, c.net.n_nodes, c.net.n_edges), (9, 20, 25));
        assert_eq!(c.corpus.n_samples, 100_000);
        let z = RunConfig::from_json_over(Preset::Full, r#"{"observation": {"radius": {"kind": "zipf", "s": 1.5}}}"#).unwrap();
        assert_eq!(z.observation.radius, RadiusChoice::Zipf { s: 1.5 });
    }

    #[test]
    fn field_level_errors() {
        let err = RunConfig::from_json_over(Preset::Full, r#"{"net": {"n_nodse": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("n_nodse"), "{err}");
        let mut c = RunConfig::preset(Preset::Desk);
        c.selection.n_holdout = 11;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "selection.n_holdout"));
        c = RunConfig::preset(Preset::Desk);
        c.eval.backend = "gpu".into();
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "eval.backend"));
        c = RunConfig::preset(Preset::Desk);
        c.observation.radius = RadiusChoice::Zipf { s: 0.0 };
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "observation.radius.s"));
    }
}
