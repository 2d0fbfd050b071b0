//! Weighted geometric means and the Carleman-type inequalities built on the
//! free positive sequence `b` ("b-strategies").

use serde::Serialize;

use crate::bounds::m_log;
use crate::error::{Error, Result};
use crate::opnorm::{check_positive, VerificationResult, DEFAULT_VERIFY_TOL};
use crate::summation::NeumaierSum;
use crate::weights::{Exponent, WeightSequence};

/// `G_n = ∏_{k≤n} a_k^{λ_k/Λ_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoMeans {
    pub values: Vec<f64>,
}

/// Log-domain running geometric means. A zero entry makes every later mean
/// zero.
pub fn geo_means(w: &WeightSequence, a: &[f64]) -> Result<GeoMeans> {
    w.require("geo_means", a.len())?;
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!(
            "geo_means: entry {} = {v} must be finite and nonnegative",
            i + 1
        )));
    }
    let lam = w.lambdas();
    let big = w.prefix();
    let mut log_sum = NeumaierSum::new();
    let mut hit_zero = false;
    let values = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x == 0.0 {
                hit_zero = true;
            }
            if hit_zero {
                0.0
            } else {
                log_sum.add(lam[i] * x.ln());
                (log_sum.value() / big[i]).exp()
            }
        })
        .collect();
    Ok(GeoMeans { values })
}

/// Rules for choosing the free sequence `b` in the master inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum BStrategy {
    /// `b_n = R_{n+1}/R_n`.
    Bennett,
    /// `b_n = e^{M λ_n/Λ_n}`.
    ExpM { m: f64 },
    /// `b_n = e^{(R_{n+1} - R_n)/R_n}`.
    ThirdChoice,
    /// `b_n = (1 - Lλ_n/(pΛ_n))^{-(p-1)}`.
    ThmOneOne { l: f64, p: f64 },
    /// Solves `Λ_n (b_n/λ_n - 1/λ_{n+1}) = 1 - L/p`.
    ThmThreeOne { l: f64, p: f64 },
    Explicit { values: Vec<f64> },
}

/// `b_1..b_{N-1}` for a weight sequence of length N (each may use
/// `λ_{n+1}`). Explicit lists are returned as given.
pub fn make_b(s: &BStrategy, w: &WeightSequence) -> Result<Vec<f64>> {
    let r = w.ratios();
    let lam = w.lambdas();
    let big = w.prefix();
    let m = r.len().saturating_sub(1);
    let lp_params = |l: f64, p: f64| -> Result<Exponent> {
        let e = Exponent::new(p)?;
        if !(l > 0.0 && l < p) {
            return Err(Error::Domain(format!("L = {l} must lie in (0, {p})")));
        }
        Ok(e)
    };
    let b: Vec<f64> = match s {
        BStrategy::Bennett => (0..m).map(|i| r[i + 1] / r[i]).collect(),
        BStrategy::ExpM { m: big_m } => {
            if !big_m.is_finite() {
                return Err(Error::Domain(format!("M = {big_m} must be finite")));
            }
            (0..m).map(|i| (big_m / r[i]).exp()).collect()
        }
        BStrategy::ThirdChoice => (0..m).map(|i| ((r[i + 1] - r[i]) / r[i]).exp()).collect(),
        BStrategy::ThmOneOne { l, p } => {
            let e = lp_params(*l, *p)?;
            (0..m)
                .map(|i| ((1.0 - e.p()) * (-l / (e.p() * r[i])).ln_1p()).exp())
                .collect()
        }
        BStrategy::ThmThreeOne { l, p } => {
            lp_params(*l, *p)?;
            (0..m)
                .map(|i| lam[i] * (1.0 / lam[i + 1] + (1.0 - l / p) / big[i]))
                .collect()
        }
        BStrategy::Explicit { values } => values.clone(),
    };
    check_positive(&b, "b sequence")?;
    Ok(b)
}

fn check_inputs(w: &WeightSequence, a: &[f64], b: &[f64], what: &'static str, extra: usize) -> Result<()> {
    if b.len() != a.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    check_positive(b, what)?;
    w.require(what, a.len() + extra)
}

/// `Σ Λ_n (b_n - 1) G_n + Λ_N G_N ≤ Σ λ_n a_n b_n^{Λ_n/λ_n}`.
pub fn verify_ps(w: &WeightSequence, a: &[f64], b: &[f64]) -> Result<VerificationResult> {
    check_inputs(w, a, b, "verify_ps", 0)?;
    let g = geo_means(w, a)?.values;
    let Some(last) = a.len().checked_sub(1) else {
        return Ok(VerificationResult::new(0.0, 0.0, DEFAULT_VERIFY_TOL));
    };
    let lam = w.lambdas();
    let big = w.prefix();
    let mut lhs = NeumaierSum::new();
    let mut rhs = NeumaierSum::new();
    for i in 0..a.len() {
        lhs.add(big[i] * (b[i] - 1.0) * g[i]);
        rhs.add(lam[i] * a[i] * (big[i] / lam[i] * b[i].ln()).exp());
    }
    lhs.add(big[last] * g[last]);
    Ok(VerificationResult::new(lhs.value(), rhs.value(), DEFAULT_VERIFY_TOL))
}

/// Per-n coefficient of `G_n` in the recast inequality:
/// `Λ_n (b_n/λ_n - 1/λ_{n+1}) ∏_{k≤n} b_k^{-Λ_k/Λ_n}`. Needs `N+1` weights.
pub fn coefficients_52(w: &WeightSequence, b: &[f64]) -> Result<Vec<f64>> {
    check_positive(b, "coefficients_52")?;
    w.require("coefficients_52", b.len() + 1)?;
    let lam = w.lambdas();
    let big = w.prefix();
    let mut log_prod = NeumaierSum::new();
    Ok(b.iter()
        .enumerate()
        .map(|(i, &bi)| {
            log_prod.add(big[i] * bi.ln());
            big[i] * (bi / lam[i] - 1.0 / lam[i + 1]) * (-log_prod.value() / big[i]).exp()
        })
        .collect())
}

/// `Σ Λ_n (b_n/λ_n - 1/λ_{n+1}) ∏_{k≤n} b_k^{-Λ_k/Λ_n} G_n ≤ Σ a_n`.
pub fn verify_52(w: &WeightSequence, a: &[f64], b: &[f64]) -> Result<VerificationResult> {
    check_inputs(w, a, b, "verify_52", 1)?;
    let g = geo_means(w, a)?.values;
    let coef = coefficients_52(w, b)?;
    let lhs: NeumaierSum = coef.iter().zip(&g).map(|(c, g)| c * g).collect();
    let rhs: NeumaierSum = a.iter().copied().collect();
    Ok(VerificationResult::new(lhs.value(), rhs.value(), DEFAULT_VERIFY_TOL))
}

/// `Σ G_n / Σ a_n`.
pub fn carleman_ratio(w: &WeightSequence, a: &[f64]) -> Result<f64> {
    let g = geo_means(w, a)?.values;
    let den = crate::summation::sum(a);
    if den.is_nan() || den <= 0.0 {
        return Err(Error::Domain("carleman_ratio: Σ a_n must be positive".into()));
    }
    Ok(crate::summation::sum(&g) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImprovedBennett {
    pub result: VerificationResult,
    /// `λ_2/Λ_2 > e^{-L}`: the bound beats the plain Bennett form.
    pub improves: bool,
}

/// Bennett-form inequality with `b_1` solved for `e^{-L}`:
///
/// `e^{-L} G_1 + Σ_{n=2}^{N} c^{λ_1/Λ_N} (λ_{n+1}/Λ_{n+1}) ∏_{k≤n} R_k^{λ_k/Λ_n} G_n ≤ Σ a_n`
/// with `c = Λ_2 (e^L - 1)/(λ_1 e^L)`. Needs `N+1` weights.
pub fn verify_improved_bennett(w: &WeightSequence, a: &[f64], l: f64) -> Result<ImprovedBennett> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("L = {l} must be positive")));
    }
    let n = a.len();
    w.require("verify_improved_bennett", (n + 1).max(2))?;
    let g = geo_means(w, a)?.values;
    let lam = w.lambdas();
    let big = w.prefix();
    let r = w.ratios();
    let improves = lam[1] / big[1] > (-l).exp();
    if n == 0 {
        return Ok(ImprovedBennett {
            result: VerificationResult::new(0.0, 0.0, DEFAULT_VERIFY_TOL),
            improves,
        });
    }
    let log_c = (big[1] * -(-l).exp_m1() / lam[0]).ln();
    let scale = (lam[0] / big[n - 1] * log_c).exp();
    let mut lhs = NeumaierSum::new();
    lhs.add((-l).exp() * g[0]);
    let mut inner = NeumaierSum::new();
    inner.add(lam[0] * r[0].ln());
    for i in 1..n {
        inner.add(lam[i] * r[i].ln());
        let bennett = (inner.value() / big[i] - r[i + 1].ln()).exp();
        lhs.add(scale * bennett * g[i]);
    }
    let rhs = crate::summation::sum(a);
    Ok(ImprovedBennett {
        result: VerificationResult::new(lhs.value(), rhs, DEFAULT_VERIFY_TOL),
        improves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImprovedExpM {
    pub result: VerificationResult,
    /// M dominates the log-ratio constant on the `N+1` prefix.
    pub m_dominates_m_log: bool,
    pub m_at_least_l: bool,
}

/// `G_1 + Σ_{n=2}^{N} c^{λ_1/Λ_N} Λ_n (e^{Mλ_n/Λ_n}/λ_n - 1/λ_{n+1}) G_n ≤ e^M Σ a_n`
/// with `c = λ_2 (e^L - 1)/λ_1`. L and M are independent inputs; their
/// relation is reported, not enforced. Needs `N+1` weights.
pub fn verify_improved_expm(
    w: &WeightSequence,
    a: &[f64],
    l: f64,
    m: f64,
) -> Result<ImprovedExpM> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("L = {l} must be positive")));
    }
    if !m.is_finite() {
        return Err(Error::Domain(format!("M = {m} must be finite")));
    }
    let n = a.len();
    w.require("verify_improved_expm", (n + 1).max(2))?;
    let g = geo_means(w, a)?.values;
    let lam = w.lambdas();
    let big = w.prefix();
    let m_log_value = m_log(&w.truncate((n + 1).max(2))?)?.value;
    let flags = |result| ImprovedExpM {
        result,
        m_dominates_m_log: m >= m_log_value,
        m_at_least_l: m >= l,
    };
    if n == 0 {
        return Ok(flags(VerificationResult::new(0.0, 0.0, DEFAULT_VERIFY_TOL)));
    }
    let log_c = (lam[1] * l.exp_m1() / lam[0]).ln();
    let scale = (lam[0] / big[n - 1] * log_c).exp();
    let mut lhs = NeumaierSum::new();
    lhs.add(g[0]);
    for i in 1..n {
        let coef = big[i] * ((m * lam[i] / big[i]).exp() / lam[i] - 1.0 / lam[i + 1]);
        lhs.add(scale * coef * g[i]);
    }
    let rhs = m.exp() * crate::summation::sum(a);
    Ok(flags(VerificationResult::new(lhs.value(), rhs, DEFAULT_VERIFY_TOL)))
}
