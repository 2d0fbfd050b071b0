//! Weight sequences λ_1..λ_N of a weighted mean matrix and their prefix sums.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::prefix_sums;

/// Strictly positive weights together with compensated prefix sums
/// `Λ_n = λ_1 + ... + λ_n`.
///
/// Indices in the public API are 0-based slices; element `i` corresponds to
/// `n = i + 1` in the usual 1-based notation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    lambdas: Vec<f64>,
    prefix: Vec<f64>,
}

impl WeightSequence {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyWeights);
        }
        for (i, &v) in lambdas.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteWeight { index: i + 1, value: v });
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveWeight { index: i + 1, value: v });
            }
        }
        let prefix = prefix_sums(&lambdas);
        if prefix.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric("weight prefix sums"));
        }
        Ok(Self { lambdas, prefix })
    }

    pub fn n_terms(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `R_n = Λ_n / λ_n` for every n; `R_1 = 1`.
    pub fn ratios(&self) -> Vec<f64> {
        self.prefix
            .iter()
            .zip(&self.lambdas)
            .map(|(big, small)| big / small)
            .collect()
    }

    /// First `n` weights. Prefix sums are reused, not recomputed.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_terms() {
            return Err(Error::InsufficientData {
                what: "truncate",
                needed: n.max(1),
                got: self.n_terms(),
            });
        }
        Ok(Self {
            lambdas: self.lambdas[..n].to_vec(),
            prefix: self.prefix[..n].to_vec(),
        })
    }

    pub(crate) fn require(&self, what: &'static str, needed: usize) -> Result<()> {
        if self.n_terms() < needed {
            Err(Error::InsufficientData {
                what,
                needed,
                got: self.n_terms(),
            })
        } else {
            Ok(())
        }
    }
}

/// Families of weights understood by [`make_weights`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// λ_n = 1 (Cesàro).
    Constant,
    /// λ_n = n^alpha.
    Power { alpha: f64 },
    /// λ_n = 1/n.
    Harmonic,
    Explicit { values: Vec<f64> },
    /// One positive decimal per line.
    File { path: PathBuf },
}

impl WeightSpec {
    pub fn power(alpha: f64) -> Self {
        WeightSpec::Power { alpha }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant => write!(f, "const"),
            WeightSpec::Power { alpha } => write!(f, "power:alpha={alpha}"),
            WeightSpec::Harmonic => write!(f, "harmonic"),
            WeightSpec::Explicit { values } => {
                write!(f, "list:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            WeightSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Accepts `const`, `power:alpha=<real>`, `harmonic`, `file:<path>` and
    /// `list:<v1>,<v2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::WeightSpec(s.to_string());
        match s {
            "const" | "constant" | "cesaro" => return Ok(WeightSpec::Constant),
            "harmonic" => return Ok(WeightSpec::Harmonic),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("power:") {
            let value = rest.strip_prefix("alpha=").ok_or_else(bad)?;
            let alpha: f64 = value.trim().parse().map_err(|_| bad())?;
            if !alpha.is_finite() {
                return Err(bad());
            }
            return Ok(WeightSpec::Power { alpha });
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(WeightSpec::File { path: PathBuf::from(path) });
        }
        if let Some(list) = s.strip_prefix("list:") {
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(WeightSpec::Explicit { values });
        }
        Err(bad())
    }
}

/// Builds the first `n_terms` weights of a family.
///
/// Explicit lists and files must supply at least `n_terms` values; only the
/// first `n_terms` are used.
pub fn make_weights(spec: &WeightSpec, n_terms: usize) -> Result<WeightSequence> {
    if n_terms == 0 {
        return Err(Error::InsufficientData {
            what: "make_weights",
            needed: 1,
            got: 0,
        });
    }
    let lambdas: Vec<f64> = match spec {
        WeightSpec::Constant => vec![1.0; n_terms],
        WeightSpec::Power { alpha } => (1..=n_terms).map(|n| (n as f64).powf(*alpha)).collect(),
        WeightSpec::Harmonic => (1..=n_terms).map(|n| 1.0 / n as f64).collect(),
        WeightSpec::Explicit { values } => take_prefix(values, n_terms, "explicit weights")?,
        WeightSpec::File { path } => take_prefix(&read_weight_file(path)?, n_terms, "weight file")?,
    };
    WeightSequence::new(lambdas)
}

fn take_prefix(values: &[f64], n: usize, what: &'static str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyWeights);
    }
    if values.len() < n {
        return Err(Error::InsufficientData {
            what,
            needed: n,
            got: values.len(),
        });
    }
    Ok(values[..n].to_vec())
}

/// Parses a weight file: UTF-8, one strictly positive decimal per line, no
/// header. Blank lines are skipped.
pub fn read_weight_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_weight_text(&text, &path.display().to_string())
}

pub fn parse_weight_text(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::WeightFile {
            path: origin.to_string(),
            line: i + 1,
            message,
        };
        let v: f64 = line
            .parse()
            .map_err(|_| err(format!("cannot parse `{line}` as a decimal")))?;
        if !v.is_finite() {
            return Err(err(format!("value `{line}` is not finite")));
        }
        if v <= 0.0 {
            return Err(err(format!("value `{line}` is not strictly positive")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptyWeights);
    }
    Ok(out)
}

/// Exponent `p ∈ (1, ∞)` with its conjugate `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Exponent(p));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `p/(p-L)`, the norm bound implied by a feasible L.
    pub fn implied_bound(&self, l: f64) -> f64 {
        self.p / (self.p - l)
    }
}
