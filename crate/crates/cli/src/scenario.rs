//! Scenario and LFP instance files.
//!
//! Both are TOML documents. Unknown keys are rejected, probability blocks
//! have no defaults, and every table is re-validated by the core types on
//! load. See the README for the full grammar.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ceo_core::lfp::LfpInstance;
use ceo_core::{JointSourcePmf, ObservationChannel, TestChannel};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    source: RawSource,
    observation: RawObservation,
    #[serde(default)]
    dictionary: Vec<RawTestChannel>,
    simulation: Option<SimulationBlock>,
    gaussian: Option<GaussianBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    /// `probs[x][s] = p(x, s)`
    probs: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    /// `probs[x][s][y] = p(y | x, s)`
    probs: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestChannel {
    /// `probs[y][u] = p(u | y)`
    probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub l_values: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    /// One weight per dictionary entry. When absent the plan comes from weight optimization.
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBlock {
    pub sigma_s2: f64,
    pub sigma_n2: Vec<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub source: JointSourcePmf,
    pub observation: ObservationChannel,
    pub dictionary: Vec<TestChannel>,
    pub simulation: Option<SimulationBlock>,
    pub gaussian: Option<GaussianBlock>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text)?;
        let source = JointSourcePmf::new(raw.source.probs).context("invalid [source] block")?;
        let observation =
            ObservationChannel::new(raw.observation.probs).context("invalid [observation] block")?;
        if observation.x_size() != source.x_size() || observation.s_size() != source.s_size() {
            bail!(
                "[observation] is indexed {}x{} over (x, s) but [source] is {}x{}",
                observation.x_size(),
                observation.s_size(),
                source.x_size(),
                source.s_size()
            );
        }
        let dictionary = raw
            .dictionary
            .into_iter()
            .enumerate()
            .map(|(k, d)| {
                let q = TestChannel::new(d.probs).with_context(|| format!("invalid [[dictionary]] entry {k}"))?;
                if q.y_size() != observation.y_size() {
                    bail!(
                        "[[dictionary]] entry {k} has {} rows but the observation alphabet has {} letters",
                        q.y_size(),
                        observation.y_size()
                    );
                }
                Ok(q)
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(sim) = &raw.simulation {
            if let Some(w) = &sim.weights {
                if w.len() != dictionary.len() {
                    bail!(
                        "[simulation] weights has {} entries for {} dictionary channels",
                        w.len(),
                        dictionary.len()
                    );
                }
            }
        }
        Ok(Self {
            source,
            observation,
            dictionary,
            simulation: raw.simulation,
            gaussian: raw.gaussian,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in scenario file {}", path.display()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLfp {
    i_max: usize,
    j_max: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c1: f64,
    c2: f64,
    tol: Option<f64>,
}

pub const DEFAULT_LFP_TOLERANCE: f64 = 1e-9;

/// An instance file: `i_max`, `j_max`, row-major `a` and `b`, `c1`, `c2`
/// and an optional bisection tolerance `tol`.
pub fn parse_lfp(text: &str) -> Result<(LfpInstance, f64)> {
    let raw: RawLfp = toml::from_str(text)?;
    let inst = LfpInstance::from_flat(raw.i_max, raw.j_max, &raw.a, &raw.b, raw.c1, raw.c2)?;
    Ok((inst, raw.tol.unwrap_or(DEFAULT_LFP_TOLERANCE)))
}

pub fn load_lfp(path: &Path) -> Result<(LfpInstance, f64)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_lfp(&text).with_context(|| format!("in instance file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = r#"
[source]
probs = [[0.5], [0.5]]

[observation]
probs = [[[0.9, 0.1]], [[0.1, 0.9]]]

[[dictionary]]
probs = [[1.0, 0.0], [0.0, 1.0]]

[simulation]
l_values = [1, 2]
trials = 10
seed = 3
"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(BSC).unwrap();
        assert_eq!(s.source.x_size(), 2);
        assert_eq!(s.observation.y_size(), 2);
        assert_eq!(s.dictionary.len(), 1);
        assert_eq!(s.simulation.unwrap().trials, 10);
        assert!(s.gaussian.is_none());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BSC.replace("seed = 3", "seed = 3\nextra = 1");
        let err = format!("{:#}", Scenario::parse(&text).unwrap_err());
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn reports_location_of_syntax_errors() {
        let text = BSC.replace("probs = [[0.5], [0.5]]", "probs = [[0.5], [0.5]");
        let err = format!("{:#}", Scenario::parse(&text).unwrap_err());
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let text = BSC.replace("[[0.9, 0.1]]", "[[0.9, 0.2]]");
        let err = format!("{:#}", Scenario::parse(&text).unwrap_err());
        assert!(err.contains("[observation]"), "{err}");
    }

    #[test]
    fn rejects_identical_rows() {
        let text = BSC.replace("[[0.1, 0.9]]", "[[0.9, 0.1]]");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn rejects_missing_probability_block() {
        let text = BSC.replace("[source]\nprobs = [[0.5], [0.5]]", "");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn rejects_mismatched_weights() {
        let text = BSC.replace("seed = 3", "seed = 3\nweights = [0.5, 0.5]");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn rejects_wrong_dictionary_alphabet() {
        let text = BSC.replace("[[1.0, 0.0], [0.0, 1.0]]", "[[1.0], [1.0], [1.0]]");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn parses_lfp_instance() {
        let (inst, tol) =
            parse_lfp("i_max = 1\nj_max = 2\na = [3.0, 5.0]\nb = [2.0, 2.0]\nc1 = 0.0\nc2 = 1.0\n").unwrap();
        assert_eq!((inst.i_max(), inst.j_max()), (1, 2));
        assert_eq!(tol, DEFAULT_LFP_TOLERANCE);
        assert!(parse_lfp("i_max = 1\nj_max = 2\na = [3.0]\nb = [2.0, 2.0]\nc1 = 0.0\nc2 = 1.0\n").is_err());
    }
}
