use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, Regime};

/// Scale list given either as `"a,b,c"`, as `"a..b"` (doubling from `a`
/// up to `b`) or, in config files, as an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleList {
    List(Vec<f64>),
    Text(String),
}

impl ScaleList {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ScaleList::List(v) => Ok(v.clone()),
            ScaleList::Text(s) => parse_scales(s),
        }
    }
}

pub fn parse_scales(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("bad scale list {s:?}: {what}"));
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad(x.trim()));
    let out = if let Some((a, b)) = s.split_once("..") {
        let (mut x, end) = (num(a)?, num(b)?);
        if !(x > 0.0 && end >= x) {
            return Err(bad("range needs 0 < a <= b"));
        }
        let mut v = Vec::new();
        while x <= end * (1.0 + 1e-12) {
            v.push(x);
            x *= 2.0;
        }
        v
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err(bad("empty or non-finite"));
    }
    Ok(out)
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad integer {:?} in {s:?}", x.trim()))))
        .collect()
}

/// Everything a run can be configured with. Files may set any subset;
/// command-line flags take precedence. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: Option<KernelFamily>,
    pub beta: Option<f64>,
    pub regime: Option<Regime>,
    pub mu: Option<f64>,
    pub m: Option<f64>,
    #[serde(rename = "T")]
    pub scales: Option<ScaleList>,
    pub k: Option<usize>,
    pub ks: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub driver: Option<String>,
    pub weight: Option<String>,
    pub integral_t: Option<f64>,
    pub integral_reps: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Fill unset fields from `other`.
    pub fn or(self, other: RunConfig) -> RunConfig {
        RunConfig {
            kernel: self.kernel.or(other.kernel),
            beta: self.beta.or(other.beta),
            regime: self.regime.or(other.regime),
            mu: self.mu.or(other.mu),
            m: self.m.or(other.m),
            scales: self.scales.or(other.scales),
            k: self.k.or(other.k),
            ks: self.ks.or(other.ks),
            reps: self.reps.or(other.reps),
            seed: self.seed.or(other.seed),
            grid: self.grid.or(other.grid),
            out: self.out.or(other.out),
            threads: self.threads.or(other.threads),
            driver: self.driver.or(other.driver),
            weight: self.weight.or(other.weight),
            integral_t: self.integral_t.or(other.integral_t),
            integral_reps: self.integral_reps.or(other.integral_reps),
        }
    }
}
