//! Flat `key = value` configuration with comma-separated lists.
//!
//! Lines starting with `#` are comments. A file whose first non-blank
//! character is `{` is read as a run manifest and its config echo is used.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{FdecError, Result};
use crate::fraccalc::{check_alpha, QuadratureSpec};
use crate::operators::Variant;

pub const KEYS: [&str; 12] = [
    "field",
    "p",
    "alpha",
    "beta",
    "n",
    "variant",
    "quad-points",
    "quad-panels",
    "out",
    "jobs",
    "seed",
    "timings",
];

/// Which experiment a run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Convergence,
    AlphaSweep,
    Exactness,
    Sparsity,
    Variants,
    DumpOperators,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Convergence,
        Experiment::AlphaSweep,
        Experiment::Exactness,
        Experiment::Sparsity,
        Experiment::Variants,
        Experiment::DumpOperators,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::AlphaSweep => "alpha-sweep",
            Experiment::Exactness => "exactness",
            Experiment::Sparsity => "sparsity",
            Experiment::Variants => "variants",
            Experiment::DumpOperators => "dump-operators",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = FdecError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| FdecError::Parse(format!("unknown experiment '{s}'")))
    }
}

/// Settings shared by all experiments. Unset lists fall back to
/// experiment-specific defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub field: Option<String>,
    pub p: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub variant: Variant,
    pub quad: QuadratureSpec,
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    pub seed: u64,
    /// Fill the `wall_ms` column (makes CSVs run-dependent).
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field: None,
            p: None,
            alpha: None,
            beta: None,
            n: None,
            variant: Variant::Paper,
            quad: QuadratureSpec::default(),
            out: PathBuf::from("out"),
            jobs: 0,
            seed: 0,
            timings: false,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| FdecError::Parse(format!("invalid value '{s}' for '{key}'")))
        })
        .collect::<Result<Vec<T>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(FdecError::Parse(format!("'{key}' needs at least one value")))
            } else {
                Ok(v)
            }
        })
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| FdecError::Parse(format!("invalid value '{value}' for '{key}'")))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "field" => self.field = Some(value.trim().to_string()),
            "p" => self.p = Some(parse_list(key, value)?),
            "alpha" => self.alpha = Some(parse_list(key, value)?),
            "beta" => self.beta = Some(parse_list(key, value)?),
            "n" => self.n = Some(parse_list(key, value)?),
            "variant" => self.variant = value.trim().parse()?,
            "quad-points" => self.quad.points = parse_one(key, value)?,
            "quad-panels" => self.quad.panels = parse_one(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "jobs" => self.jobs = parse_one(key, value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "timings" => self.timings = parse_one(key, value)?,
            _ => return Err(FdecError::Parse(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every pair in order.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Flat echo of every explicitly meaningful setting, parseable by
    /// [`ExperimentConfig::set`].
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        if let Some(f) = &self.field {
            m.insert("field".into(), f.clone());
        }
        if let Some(p) = &self.p {
            m.insert("p".into(), join(p));
        }
        if let Some(a) = &self.alpha {
            m.insert("alpha".into(), join(a));
        }
        if let Some(b) = &self.beta {
            m.insert("beta".into(), join(b));
        }
        if let Some(n) = &self.n {
            m.insert("n".into(), join(n));
        }
        m.insert("variant".into(), self.variant.to_string());
        m.insert("quad-points".into(), self.quad.points.to_string());
        m.insert("quad-panels".into(), self.quad.panels.to_string());
        m.insert("out".into(), self.out.display().to_string());
        m.insert("jobs".into(), self.jobs.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("timings".into(), self.timings.to_string());
        m
    }

    /// Degrees to run.
    pub fn p_list(&self, exp: Experiment) -> Vec<usize> {
        self.p.clone().unwrap_or_else(|| match exp {
            Experiment::Exactness | Experiment::Variants => vec![0, 1],
            _ => vec![0, 1, 2],
        })
    }

    pub fn alpha_list(&self, exp: Experiment) -> Vec<f64> {
        self.alpha.clone().unwrap_or_else(|| match exp {
            Experiment::Convergence => vec![0.25, 0.9],
            Experiment::AlphaSweep => vec![0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999],
            Experiment::DumpOperators => vec![0.5],
            _ => vec![0.25, 0.5, 0.9],
        })
    }

    pub fn beta_list(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(|| vec![0.1, 0.5, 0.75])
    }

    /// Subdivision counts for degree `p`.
    pub fn n_list(&self, exp: Experiment, p: usize) -> Vec<usize> {
        if let Some(n) = &self.n {
            return n.clone();
        }
        match exp {
            Experiment::Convergence => {
                if p >= 2 {
                    vec![2, 4, 8]
                } else {
                    vec![2, 4, 8, 16]
                }
            }
            Experiment::AlphaSweep => vec![if p >= 2 { 8 } else { 16 }],
            Experiment::Sparsity => vec![1, 2, 3, 4, 8],
            Experiment::DumpOperators => vec![2],
            _ => vec![4, 8, 16],
        }
    }

    /// Registered field used for degree `p`.
    pub fn field_for(&self, p: usize) -> String {
        self.field
            .clone()
            .unwrap_or_else(|| if p == 0 { "paper-f".into() } else { "paper-F".into() })
    }

    pub fn validate(&self, exp: Experiment) -> Result<()> {
        self.quad.validate()?;
        let ps = self.p_list(exp);
        let max_p = match exp {
            Experiment::Exactness | Experiment::Variants => 1,
            _ => 2,
        };
        if ps.is_empty() {
            return Err(FdecError::InvalidArgument("empty p list".into()));
        }
        if let Some(&p) = ps.iter().find(|&&p| p > max_p) {
            return Err(FdecError::InvalidDegree {
                degree: p,
                expected: if max_p == 1 { "0, 1" } else { "0, 1, 2" },
            });
        }
        for a in self.alpha_list(exp) {
            check_alpha(a)?;
        }
        for b in self.beta_list() {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(FdecError::InvalidOrder {
                    value: b,
                    reason: "integral order must be nonnegative",
                });
            }
        }
        for &p in &ps {
            let ns = self.n_list(exp, p);
            if ns.is_empty() || ns.contains(&0) {
                return Err(FdecError::InvalidArgument("subdivision counts must be positive".into()));
            }
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FdecError::InvalidArgument(format!(
                    "n list must be strictly increasing, got {ns:?}"
                )));
            }
            if exp == Experiment::AlphaSweep && ns.len() != 1 {
                return Err(FdecError::InvalidArgument(
                    "alpha-sweep takes a single n".into(),
                ));
            }
            if !matches!(exp, Experiment::Sparsity | Experiment::DumpOperators) {
                crate::forms::fields::field(&self.field_for(p), p)?;
            }
        }
        Ok(())
    }
}

/// Parses `key = value` lines (or a manifest's config echo).
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    if text.trim_start().starts_with('{') {
        return parse_manifest_config(text);
    }
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| FdecError::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(FdecError::Parse(format!("line {}: unknown config key '{k}'", lineno + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(FdecError::Parse(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
    }
    Ok(out)
}

fn parse_manifest_config(text: &str) -> Result<BTreeMap<String, String>> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| FdecError::Parse("empty manifest".into()))?;
    let v: serde_json::Value =
        serde_json::from_str(first).map_err(|e| FdecError::Parse(format!("manifest header: {e}")))?;
    let cfg = v
        .get("config")
        .and_then(|c| c.as_object())
        .ok_or_else(|| FdecError::Parse("manifest header has no config object".into()))?;
    let mut out = BTreeMap::new();
    for (k, val) in cfg {
        if !KEYS.contains(&k.as_str()) {
            return Err(FdecError::Parse(format!("unknown config key '{k}' in manifest")));
        }
        let s = val
            .as_str()
            .ok_or_else(|| FdecError::Parse(format!("manifest value for '{k}' is not a string")))?;
        out.insert(k.clone(), s.to_string());
    }
    Ok(out)
}

/// Reads and parses a config or manifest file.
pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| FdecError::io(path, e))?;
    parse_config_text(&text)
}
