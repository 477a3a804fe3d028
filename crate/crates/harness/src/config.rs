//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use dsc_core::{Field, JointPmf};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Fresh uniformly random surjective matrices per trial.
    Random,
    /// Aᵢ = I, so m₁ = m₂ = n.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_systems")]
    pub systems: usize,
    #[serde(default = "default_suite_q")]
    pub q: Vec<u32>,
    #[serde(default = "default_suite_n")]
    pub n: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            systems: default_systems(),
            q: default_suite_q(),
            n: default_suite_n(),
        }
    }
}

fn default_systems() -> usize {
    50
}
fn default_suite_q() -> Vec<u32> {
    vec![2, 3]
}
fn default_suite_n() -> Vec<usize> {
    vec![2, 3, 4]
}
fn default_trials() -> usize {
    1
}
fn default_mc_samples() -> usize {
    10_000
}
fn default_mode() -> Mode {
    Mode::Exact
}
fn default_encoder() -> EncoderKind {
    EncoderKind::Random
}
fn default_threshold() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// q₁ × q₂ table, row index = X₁ symbol.
    pub source_pmf: Vec<Vec<f64>>,
    pub key_pmf: Vec<Vec<f64>>,
    pub q1: u32,
    pub q2: u32,
    pub n: Vec<usize>,
    /// One (m₁, m₂) per entry of `n`.
    #[serde(default)]
    pub m: Option<Vec<[usize; 2]>>,
    /// Target (R₁, R₂); mᵢ = round(Rᵢ n / log₂ qᵢ) clamped to [1, n].
    #[serde(default)]
    pub rate_targets: Option<[f64; 2]>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_threshold")]
    pub epsilon: f64,
    #[serde(default = "default_threshold")]
    pub delta: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_encoder")]
    pub encoder: EncoderKind,
    #[serde(default)]
    pub random_offsets: bool,
    /// Test hook: every built system gets a decoder table with one entry
    /// overwritten by another, so it is no longer injective.
    #[serde(default)]
    pub corrupt_decoder: bool,
    /// Write measured wall time into `runtime_ms`. Off by default so that
    /// repeated sweeps produce identical files.
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub suite: Option<SuiteConfig>,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub fields: [Field; 2],
    pub source: JointPmf,
    pub keys: JointPmf,
    /// (n, m₁, m₂) settings in sweep order.
    pub settings: Vec<(usize, usize, usize)>,
}

fn invalid(field: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid("<file>", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the field in unknown/missing/type errors
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<json>")
                .to_string();
            HarnessError::Config {
                field,
                message: msg,
            }
        })
    }

    pub fn validate(self) -> Result<Experiment, HarnessError> {
        let f1 = Field::new(self.q1).map_err(|e| invalid("q1", e.to_string()))?;
        let f2 = Field::new(self.q2).map_err(|e| invalid("q2", e.to_string()))?;
        let source = pmf("source_pmf", &self.source_pmf, f1, f2)?;
        let keys = pmf("key_pmf", &self.key_pmf, f1, f2)?;
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(invalid("n", "need at least one blocklength, all ≥ 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be ≥ 1"));
        }
        if self.mode == Mode::MonteCarlo && self.mc_samples == 0 {
            return Err(invalid("mc_samples", "must be ≥ 1 in montecarlo mode"));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("{v} is not a nonnegative number")));
            }
        }
        if let Some(s) = &self.suite {
            if s.systems == 0 {
                return Err(invalid("suite.systems", "must be ≥ 1"));
            }
            if s.q.is_empty() {
                return Err(invalid("suite.q", "empty list"));
            }
            for &q in &s.q {
                Field::new(q).map_err(|e| invalid("suite.q", e.to_string()))?;
            }
            if s.n.is_empty() || s.n.iter().any(|&n| n < 2) {
                return Err(invalid(
                    "suite.n",
                    "need blocklengths ≥ 2 so that some m < n",
                ));
            }
        }
        let settings = self.settings([f1, f2])?;
        Ok(Experiment {
            fields: [f1, f2],
            source,
            keys,
            settings,
            config: self,
        })
    }

    fn settings(&self, fields: [Field; 2]) -> Result<Vec<(usize, usize, usize)>, HarnessError> {
        let ms: Vec<[usize; 2]> = match (self.encoder, &self.m, self.rate_targets) {
            (EncoderKind::Identity, None, None) => self.n.iter().map(|&n| [n, n]).collect(),
            (_, Some(_), Some(_)) => {
                return Err(invalid("m", "give either m or rate_targets, not both"))
            }
            (_, Some(m), None) => {
                if m.len() != self.n.len() {
                    return Err(invalid(
                        "m",
                        format!("{} entries for {} blocklengths", m.len(), self.n.len()),
                    ));
                }
                m.clone()
            }
            (_, None, Some(r)) => {
                if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(invalid("rate_targets", "rates must be positive"));
                }
                self.n
                    .iter()
                    .map(|&n| {
                        let m = |i: usize| {
                            let raw = (r[i] * n as f64 / fields[i].log2_order()).round() as usize;
                            raw.clamp(1, n)
                        };
                        [m(0), m(1)]
                    })
                    .collect()
            }
            (_, None, None) => return Err(invalid("m", "either m or rate_targets is required")),
        };
        let mut out = Vec::with_capacity(ms.len());
        for (&n, [m1, m2]) in self.n.iter().zip(ms) {
            if m1 == 0 || m2 == 0 || m1 > n || m2 > n {
                return Err(invalid("m", format!("({m1}, {m2}) not within 1..={n}")));
            }
            if self.encoder == EncoderKind::Identity && (m1 != n || m2 != n) {
                return Err(invalid("m", "identity encoders need m1 = m2 = n"));
            }
            out.push((n, m1, m2));
        }
        Ok(out)
    }
}

fn pmf(name: &str, rows: &[Vec<f64>], f1: Field, f2: Field) -> Result<JointPmf, HarnessError> {
    if rows.len() != f1.q() as usize || rows.iter().any(|r| r.len() != f2.q() as usize) {
        return Err(invalid(
            name,
            format!("table must be {} × {}", f1.q(), f2.q()),
        ));
    }
    JointPmf::from_rows(f1, f2, rows).map_err(|e| invalid(name, e.to_string()))
}
