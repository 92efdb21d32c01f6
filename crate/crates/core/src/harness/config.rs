//! Study configuration and its flat `key = value` text format.
//!
//! ```text
//! # two-index benchmark, p = 4
//! model = Ex6_1
//! sigma_grid = 0.1, 0.4, 0.8
//! n = 100
//! replicates = 500
//! methods = scr:r=6qn, gcr:r=2qn:rho=1, sir:h=6, save:h=6, phd
//! q = 2
//! norm = frobenius
//! master_seed = 1
//! workers = 4
//! ```
//!
//! Method parameters: `c=<cutoff>` or `r=<proportion>` (a number, or `<k>qn`
//! meaning `k·q·n / C(n,2)`) for the contour methods, `rho=<radius>` for GCR,
//! `h=<slices>` for SIR and SAVE.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::SliceSpec;
use crate::error::{Error, Result};
use crate::gcr::TubeConfig;
use crate::linalg::{Method, Norm};
use crate::scr::{pair_count, ThresholdSpec};
use crate::simgen::ModelId;

/// Threshold as written in a config; resolved against `n` and `q` at fit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    Fixed(f64),
    Proportion(f64),
    /// `r = k·q·n / C(n,2)`.
    PerObservation(f64),
}

impl ThresholdRule {
    pub fn resolve(self, n: usize, q: usize) -> ThresholdSpec {
        match self {
            ThresholdRule::Fixed(c) => ThresholdSpec::FixedC(c),
            ThresholdRule::Proportion(r) => ThresholdSpec::Proportion(r),
            ThresholdRule::PerObservation(k) => {
                let r = k * (q * n) as f64 / pair_count(n) as f64;
                ThresholdSpec::Proportion(r.min(1.0))
            }
        }
    }

    fn parse(key: &str, value: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad threshold '{key}={value}'"));
        match key {
            "c" => value.parse().map(ThresholdRule::Fixed).map_err(|_| bad()),
            "r" => match value.strip_suffix("qn") {
                Some(k) => k.parse().map(ThresholdRule::PerObservation).map_err(|_| bad()),
                None => value.parse().map(ThresholdRule::Proportion).map_err(|_| bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Fixed(c) => write!(f, "c={c}"),
            ThresholdRule::Proportion(r) => write!(f, "r={r}"),
            ThresholdRule::PerObservation(k) => write!(f, "r={k}qn"),
        }
    }
}

/// One estimator with its tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodConfig {
    Scr { threshold: ThresholdRule },
    Gcr { threshold: ThresholdRule, rho: f64 },
    Ols,
    Sir { n_slices: usize },
    Save { n_slices: usize },
    Phd,
}

impl MethodConfig {
    pub fn method(&self) -> Method {
        match self {
            MethodConfig::Scr { .. } => Method::Scr,
            MethodConfig::Gcr { .. } => Method::Gcr,
            MethodConfig::Ols => Method::Ols,
            MethodConfig::Sir { .. } => Method::Sir,
            MethodConfig::Save { .. } => Method::Save,
            MethodConfig::Phd => Method::Phd,
        }
    }

    pub fn threshold(&self, n: usize, q: usize) -> Option<ThresholdSpec> {
        match self {
            MethodConfig::Scr { threshold } | MethodConfig::Gcr { threshold, .. } => Some(threshold.resolve(n, q)),
            _ => None,
        }
    }

    pub fn tube(&self, n: usize, q: usize) -> Option<TubeConfig> {
        match *self {
            MethodConfig::Gcr { threshold, rho } => Some(TubeConfig::new(rho, threshold.resolve(n, q))),
            _ => None,
        }
    }

    pub fn slices(&self) -> Option<SliceSpec> {
        match *self {
            MethodConfig::Sir { n_slices } | MethodConfig::Save { n_slices } => Some(SliceSpec::equal_count(n_slices)),
            _ => None,
        }
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodConfig::Scr { threshold } => write!(f, "scr:{threshold}"),
            MethodConfig::Gcr { threshold, rho } => write!(f, "gcr:{threshold}:rho={rho}"),
            MethodConfig::Ols => f.write_str("ols"),
            MethodConfig::Sir { n_slices } => write!(f, "sir:h={n_slices}"),
            MethodConfig::Save { n_slices } => write!(f, "save:h={n_slices}"),
            MethodConfig::Phd => f.write_str("phd"),
        }
    }
}

impl FromStr for MethodConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let method: Method = name.parse().map_err(|_| Error::Config(format!("unknown method '{name}'")))?;
        let mut threshold = None;
        let mut rho = None;
        let mut slices = None;
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in '{s}', found '{part}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "c" | "r" => threshold = Some(ThresholdRule::parse(key, value)?),
                "rho" => {
                    rho = Some(value.parse::<f64>().map_err(|_| Error::Config(format!("bad rho '{value}'")))?)
                }
                "h" => {
                    slices = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("bad slice count '{value}'")))?,
                    )
                }
                _ => return Err(Error::Config(format!("unknown method parameter '{key}' in '{s}'"))),
            }
        }
        let allowed = match method {
            Method::Scr => rho.is_none() && slices.is_none(),
            Method::Gcr => slices.is_none(),
            Method::Sir | Method::Save => threshold.is_none() && rho.is_none(),
            Method::Ols | Method::Phd => threshold.is_none() && rho.is_none() && slices.is_none(),
        };
        if !allowed {
            return Err(Error::Config(format!("parameter not applicable to {method} in '{s}'")));
        }
        let threshold = threshold.unwrap_or(ThresholdRule::Proportion(0.05));
        Ok(match method {
            Method::Scr => MethodConfig::Scr { threshold },
            Method::Gcr => MethodConfig::Gcr {
                threshold,
                rho: rho.unwrap_or(1.0),
            },
            Method::Ols => MethodConfig::Ols,
            Method::Sir => MethodConfig::Sir {
                n_slices: slices.unwrap_or(6),
            },
            Method::Save => MethodConfig::Save {
                n_slices: slices.unwrap_or(6),
            },
            Method::Phd => MethodConfig::Phd,
        })
    }
}

impl TryFrom<String> for MethodConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodConfig> for String {
    fn from(m: MethodConfig) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: ModelId,
    /// Noise levels, or locations `a` for `Ex6_5`.
    #[serde(rename = "sigma_grid")]
    pub grid: Vec<f64>,
    pub n: usize,
    pub replicates: usize,
    pub methods: Vec<MethodConfig>,
    pub q: usize,
    pub norm: Norm,
    pub master_seed: u64,
    /// Execution setting only; results do not depend on it.
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("bad entry '{s}' for '{key}'"))))
        .collect()
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must be nonempty".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("sigma_grid must be nonempty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("grid values must be finite and >= 0".into()));
        }
        if self.n < 2 {
            return Err(Error::Config("n must be >= 2".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.q == 0 || self.q >= self.model.dim() {
            return Err(Error::Config(format!(
                "q = {} must lie in 1..{} for {}",
                self.q,
                self.model.dim(),
                self.model
            )));
        }
        Ok(())
    }

    /// Parses the `key = value` text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut model = None;
        let mut grid = None;
        let mut n = None;
        let mut replicates = None;
        let mut methods = None;
        let mut q = None;
        let mut norm = Norm::default();
        let mut master_seed = 0;
        let mut workers = default_workers();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model" => model = Some(parse_scalar::<ModelId>(key, value)?),
                "sigma_grid" | "a_grid" => grid = Some(parse_list::<f64>(key, value)?),
                "n" => n = Some(parse_scalar(key, value)?),
                "replicates" => replicates = Some(parse_scalar(key, value)?),
                "methods" => {
                    methods = Some(
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(str::parse::<MethodConfig>)
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "q" => q = Some(parse_scalar(key, value)?),
                "norm" => norm = value.parse().map_err(|_| Error::Config(format!("bad norm '{value}'")))?,
                "master_seed" => master_seed = parse_scalar(key, value)?,
                "workers" => workers = parse_scalar(key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }

        let missing = |k: &str| Error::Config(format!("missing required key '{k}'"));
        let model: ModelId = model.ok_or_else(|| missing("model"))?;
        let cfg = StudyConfig {
            model,
            grid: grid.ok_or_else(|| missing("sigma_grid"))?,
            n: n.ok_or_else(|| missing("n"))?,
            replicates: replicates.ok_or_else(|| missing("replicates"))?,
            methods: methods.ok_or_else(|| missing("methods"))?,
            q: q.unwrap_or_else(|| model.structural_dim()),
            norm,
            master_seed,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads either the text format or a JSON report with an embedded `config`.
    pub fn from_source(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            #[derive(Deserialize)]
            struct Embedded {
                config: StudyConfig,
            }
            let e: Embedded = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
            e.config.validate()?;
            Ok(e.config)
        } else {
            Self::from_text(text)
        }
    }

    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let grid_key = if self.model.grid_is_location() { "a_grid" } else { "sigma_grid" };
        format!(
            "model = {}\n{grid_key} = {}\nn = {}\nreplicates = {}\nmethods = {}\nq = {}\nnorm = {}\nmaster_seed = {}\nworkers = {}\n",
            self.model,
            join(self.grid.iter().map(|g| g.to_string()).collect()),
            self.n,
            self.replicates,
            join(self.methods.iter().map(|m| m.to_string()).collect()),
            self.q,
            self.norm,
            self.master_seed,
            self.workers
        )
    }
}
