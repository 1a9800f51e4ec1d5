//! Experiment configuration: TOML with strict keys.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adversary::fnv1a64;
use crate::erm::TheoryConstants;
use crate::error::{PacError, Result};
use crate::experiments::fixtures::FixtureName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    UpperSweep,
    LowerBound,
    Identities,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::UpperSweep => "upper_sweep",
            ExperimentKind::LowerBound => "lower_bound",
            ExperimentKind::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub tau: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    /// Fixture names, optionally with arguments.
    pub fixtures: Vec<String>,
}

fn default_c_prime() -> f64 {
    576.0
}

fn default_learner() -> String {
    "least_frequent".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSpec {
    /// Domain size; required unless `grid.tau` is given.
    #[serde(default)]
    pub u: Option<usize>,
    #[serde(default = "default_c_prime")]
    pub c_prime: f64,
    #[serde(default = "default_learner")]
    pub learner: String,
}

impl Default for LowerBoundSpec {
    fn default() -> Self {
        Self {
            u: None,
            c_prime: default_c_prime(),
            learner: default_learner(),
        }
    }
}

fn default_trials() -> usize {
    1
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Per-iteration core-loop rows (upper sweeps only).
    #[serde(default)]
    pub trace_output: Option<PathBuf>,
    /// Record wall-clock milliseconds; off keeps output byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub consts: TheoryConstants,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub class: Option<ClassSpec>,
    #[serde(default)]
    pub lower_bound: Option<LowerBoundSpec>,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key =` assignment, or 1.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |k| k + 1)
}

impl ExperimentConfig {
    /// Parses and validates; every error carries a 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| PacError::Config {
            line: e.span().map_or(1, |s| line_of_offset(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| PacError::Config {
            line: line_of_key(text, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PacError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Re-serialized form; insensitive to comments, whitespace and key order.
    pub fn canonical_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// FNV-1a of [`Self::canonical_text`].
    pub fn config_hash(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let fail = |key: &'static str, msg: String| Err((key, msg));
        if self.trials == 0 {
            return fail("trials", "trials must be >= 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail("delta", format!("delta must lie in (0,1), got {}", self.delta));
        }
        if let Err(e) = self.consts.validate() {
            return fail("c_", e.to_string());
        }
        let g = &self.grid;
        match self.kind {
            ExperimentKind::UpperSweep => {
                let Some(class) = &self.class else {
                    return fail("kind", "upper_sweep needs a [class] section".into());
                };
                if class.fixtures.is_empty() {
                    return fail("fixtures", "at least one fixture is required".into());
                }
                for f in &class.fixtures {
                    if let Err(e) = FixtureName::parse(f) {
                        return fail("fixtures", e.to_string());
                    }
                }
                if g.n.is_empty() || g.n.iter().any(|&n| n < 3) {
                    return fail("n", "grid.n must be nonempty with every n >= 3".into());
                }
                if let Some(t) = g.tau.iter().find(|t| !(**t >= 0.0 && **t < 1.0)) {
                    return fail("tau", format!("grid.tau values must lie in [0,1), got {t}"));
                }
                if !g.d.is_empty() || !g.alpha.is_empty() {
                    return fail("d", "grid.d and grid.alpha apply to lower_bound runs only".into());
                }
                if self.lower_bound.is_some() {
                    return fail("kind", "[lower_bound] is not used by upper_sweep".into());
                }
            }
            ExperimentKind::LowerBound => {
                let lb = self.lower_bound.clone().unwrap_or_default();
                if g.n.is_empty() || g.n.contains(&0) {
                    return fail("n", "grid.n must be nonempty and positive".into());
                }
                if g.d.is_empty() || g.d.contains(&0) {
                    return fail("d", "grid.d must be nonempty and positive".into());
                }
                if lb.c_prime.is_nan() || lb.c_prime <= 2.0 {
                    return fail("c_prime", format!("c_prime must exceed 2, got {}", lb.c_prime));
                }
                if !["least_frequent", "fixed_prefix", "truth_oracle"].contains(&lb.learner.as_str()) {
                    return fail(
                        "learner",
                        format!("unknown learner `{}`; available: least_frequent, fixed_prefix, truth_oracle", lb.learner),
                    );
                }
                if !g.tau.is_empty() && !g.alpha.is_empty() {
                    return fail("alpha", "give grid.tau or grid.alpha, not both".into());
                }
                if g.tau.is_empty() && lb.u.is_none() {
                    return fail("u", "lower_bound.u is required unless grid.tau is given".into());
                }
                if !g.tau.is_empty() && lb.u.is_some() {
                    return fail("u", "lower_bound.u is derived from grid.tau; remove one".into());
                }
                if let Some(t) = g.tau.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
                    return fail("tau", format!("grid.tau values must lie in (0,1), got {t}"));
                }
                if let Some(a) = g.alpha.iter().find(|a| !(**a >= 0.0 && **a < 1.0)) {
                    return fail("alpha", format!("grid.alpha values must lie in [0,1), got {a}"));
                }
                if let Some(u) = lb.u {
                    if let Some(d) = g.d.iter().find(|&&d| u < 2 * d) {
                        return fail("u", format!("need u >= 2d, got u={u}, d={d}"));
                    }
                }
                if self.class.is_some() {
                    return fail("kind", "[class] is not used by lower_bound".into());
                }
            }
            ExperimentKind::Identities => {
                if self.class.is_some() || self.lower_bound.is_some() || *g != Grid::default() {
                    return fail("kind", "identities runs take only seed and trials".into());
                }
            }
        }
        Ok(())
    }
}
