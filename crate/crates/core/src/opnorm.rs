//! Finite sections of weighted mean matrices, lower bounds on their
//! `l^p → l^p` norms, and verifiers for the `l^p` inequalities.
//!
//! Sections are never materialized: the forward map is a running weighted
//! average and the transpose map a suffix sum, both O(N).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::{log_add_exp, NeumaierSum};
use crate::weights::{Exponent, WeightSequence};

pub const DEFAULT_NORM_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Relative slack granted to verifiers for roundoff.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-12;

/// N×N lower-triangular section with entries `λ_k/Λ_n` for `k ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    weights: WeightSequence,
}

pub fn build_section(w: &WeightSequence, n: usize) -> Result<FiniteSection> {
    Ok(FiniteSection {
        weights: w.truncate(n)?,
    })
}

impl FiniteSection {
    pub fn size(&self) -> usize {
        self.weights.n_terms()
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    /// Entry `a_{n,k}`, 1-based.
    pub fn entry(&self, n: usize, k: usize) -> f64 {
        if k == 0 || k > n || n > self.size() {
            0.0
        } else {
            self.weights.lambdas()[k - 1] / self.weights.prefix()[n - 1]
        }
    }

    /// Row `n` (1-based) as a dense vector of length N.
    pub fn row(&self, n: usize) -> Vec<f64> {
        (1..=self.size()).map(|k| self.entry(n, k)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (1..=self.size()).map(|n| self.row(n)).collect()
    }

    /// Running weighted averages `A_n = Σ_{k≤n} λ_k a_k / Λ_n`.
    pub fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a.len())?;
        Ok(self.apply_unchecked(a))
    }

    fn apply_unchecked(&self, a: &[f64]) -> Vec<f64> {
        let lam = self.weights.lambdas();
        let big = self.weights.prefix();
        let mut num = NeumaierSum::new();
        a.iter()
            .enumerate()
            .map(|(i, &x)| {
                num.add(lam[i] * x);
                num.value() / big[i]
            })
            .collect()
    }

    /// `(Aᵀ y)_k = λ_k Σ_{n≥k} y_n/Λ_n`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok(self.apply_transpose_unchecked(y))
    }

    fn apply_transpose_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let lam = self.weights.lambdas();
        let big = self.weights.prefix();
        let mut out = vec![0.0; y.len()];
        let mut acc = NeumaierSum::new();
        for i in (0..y.len()).rev() {
            acc.add(y[i] / big[i]);
            out[i] = lam[i] * acc.value();
        }
        out
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got,
            });
        }
        Ok(())
    }

    /// `||A x||_p / ||x||_p`.
    pub fn ratio(&self, x: &[f64], e: &Exponent) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(lp_norm(&self.apply_unchecked(x), e.p()) / lp_norm(x, e.p()))
    }
}

/// `(Σ |x_i|^p)^{1/p}`, scaled by the max entry to avoid overflow.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: NeumaierSum = x.iter().map(|v| (v.abs() / m).powf(p)).collect();
    m * s.value().powf(1.0 / p)
}

fn normalize(x: &mut [f64], p: f64) {
    let n = lp_norm(x, p);
    x.iter_mut().for_each(|v| *v /= n);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    /// `||A·witness||_p / ||witness||_p`; a lower bound on `||A||_{p,p}`.
    pub value: f64,
    pub iterations: usize,
    pub rel_change: f64,
    pub converged: bool,
    #[serde(skip)]
    pub witness: Vec<f64>,
}

/// Nonlinear power iteration
/// `x ← normalize((Aᵀ (A x)^{p-1})^{1/(p-1)})` from the uniform start.
///
/// Stops when the ratio changes by less than `tol` relatively, or after
/// `max_iter` steps with `converged = false`. The best ratio seen is
/// returned, recomputed from its witness.
pub fn norm_estimate(
    a: &FiniteSection,
    e: &Exponent,
    tol: f64,
    max_iter: usize,
) -> Result<NormEstimate> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let p = e.p();
    let n = a.size();
    let mut x = vec![1.0; n];
    normalize(&mut x, p);
    let mut ratio = lp_norm(&a.apply_unchecked(&x), p);
    let mut best = (ratio, x.clone());
    let mut rel_change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = n == 1;

    while !converged && iterations < max_iter {
        iterations += 1;
        let y = a.apply_unchecked(&x);
        let z: Vec<f64> = y.iter().map(|v| v.powf(p - 1.0)).collect();
        let mut next: Vec<f64> = a
            .apply_transpose_unchecked(&z)
            .into_iter()
            .map(|s| s.powf(1.0 / (p - 1.0)))
            .collect();
        normalize(&mut next, p);
        let next_ratio = lp_norm(&a.apply_unchecked(&next), p);
        if !next_ratio.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("norm_estimate power iteration"));
        }
        rel_change = (next_ratio - ratio).abs() / next_ratio;
        ratio = next_ratio;
        x = next;
        if ratio > best.0 {
            best = (ratio, x.clone());
        }
        converged = rel_change < tol;
    }

    let witness = best.1;
    let value = a.ratio(&witness, e)?;
    Ok(NormEstimate {
        value,
        iterations,
        rel_change,
        converged,
        witness,
    })
}

/// Exhaustive search over the nonnegative part of the unit `l^p` sphere,
/// for N ≤ 4. Independent of [`norm_estimate`].
///
/// Points are `x_i = y_i^{2/p}` with `y` on the nonnegative unit 2-sphere in
/// spherical angles, so `Σ x_i^p = 1` exactly. The best grid points are then
/// polished by a compass search in the angles.
pub fn brute_force_norm(a: &FiniteSection, e: &Exponent) -> Result<f64> {
    let n = a.size();
    let per_axis: usize = match n {
        1 => return a.ratio(&[1.0], e),
        2 => 100_001,
        3 => 301,
        4 => 61,
        _ => {
            return Err(Error::Domain(format!(
                "brute_force_norm supports N <= 4, got {n}"
            )))
        }
    };
    let dims = n - 1;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let step = half_pi / (per_axis - 1) as f64;
    let objective = |angles: &[f64]| -> f64 {
        let x = sphere_point(angles, e.p());
        lp_norm(&a.apply_unchecked(&x), e.p()) / lp_norm(&x, e.p())
    };

    const KEEP: usize = 8;
    let mut top: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
    let total = per_axis.pow(dims as u32);
    let mut angles = vec![0.0; dims];
    for idx in 0..total {
        let mut rem = idx;
        for slot in angles.iter_mut() {
            *slot = (rem % per_axis) as f64 * step;
            rem /= per_axis;
        }
        let v = objective(&angles);
        if top.len() < KEEP || v > top[top.len() - 1].0 {
            top.push((v, angles.clone()));
            top.sort_by(|l, r| r.0.total_cmp(&l.0));
            top.truncate(KEEP);
        }
    }

    let mut best = f64::NEG_INFINITY;
    for (mut value, mut point) in top {
        let mut h = step;
        while h > 1e-15 {
            let mut improved = false;
            for d in 0..dims {
                for sign in [1.0, -1.0] {
                    let mut trial = point.clone();
                    trial[d] = (trial[d] + sign * h).clamp(0.0, half_pi);
                    let v = objective(&trial);
                    if v > value {
                        value = v;
                        point = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

fn sphere_point(angles: &[f64], p: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(angles.len() + 1);
    let mut tail = 1.0;
    for &t in angles {
        y.push(tail * t.cos());
        tail *= t.sin();
    }
    y.push(tail);
    y.into_iter().map(|v| v.max(0.0).powf(2.0 / p)).collect()
}

/// Outcome of checking one inequality instance `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationResult {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationResult {
    pub fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = rhs - lhs;
        let pass = residual >= -tolerance * rhs.abs().max(1.0);
        Self {
            lhs,
            rhs,
            residual,
            tolerance,
            pass,
        }
    }

    /// Same instance judged under a different tolerance.
    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self::new(self.lhs, self.rhs, tolerance)
    }
}

pub(crate) fn check_nonnegative(a: &[f64], what: &str) -> Result<()> {
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!(
            "{what}: entry {} = {v} must be finite and nonnegative",
            i + 1
        )));
    }
    Ok(())
}

pub(crate) fn check_positive(a: &[f64], what: &str) -> Result<()> {
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !v.is_finite() || **v <= 0.0) {
        return Err(Error::Domain(format!(
            "{what}: entry {} = {v} must be finite and positive",
            i + 1
        )));
    }
    Ok(())
}

fn sum_pow(a: &[f64], p: f64) -> f64 {
    a.iter().map(|v| v.powf(p)).collect::<NeumaierSum>().value()
}

fn weighted_averages(w: &WeightSequence, a: &[f64]) -> Result<Vec<f64>> {
    Ok(build_section(w, a.len())?.apply_unchecked(a))
}

/// `Σ A_n^p ≤ (p/(p-L))^p Σ a_n^p`.
pub fn verify_weighted_hardy(
    w: &WeightSequence,
    e: &Exponent,
    a: &[f64],
    l: f64,
) -> Result<VerificationResult> {
    if !(l > 0.0 && l < e.p()) {
        return Err(Error::Domain(format!("L = {l} must lie in (0, {})", e.p())));
    }
    check_nonnegative(a, "verify_weighted_hardy")?;
    if a.is_empty() {
        return Ok(VerificationResult::new(0.0, 0.0, DEFAULT_VERIFY_TOL));
    }
    let p = e.p();
    let lhs = sum_pow(&weighted_averages(w, a)?, p);
    let rhs = e.implied_bound(l).powf(p) * sum_pow(a, p);
    Ok(VerificationResult::new(lhs, rhs, DEFAULT_VERIFY_TOL))
}

/// `Σ_n W_n^{-(p-1)} (w_n^{p-1}/λ_n^p − w_{n+1}^{p-1}/λ_{n+1}^p) Λ_n^p A_n^p ≤ Σ a_n^p`
/// with `W_n = Σ_{k≤n} w_k`. Needs `N+1` weights and `N+1` aux values.
pub fn verify_53(
    w: &WeightSequence,
    e: &Exponent,
    a: &[f64],
    aux: &[f64],
) -> Result<VerificationResult> {
    let n = a.len();
    check_nonnegative(a, "verify_53")?;
    check_positive(aux, "verify_53 aux")?;
    if aux.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: aux.len(),
        });
    }
    w.require("verify_53", n + 1)?;
    let p = e.p();
    let lam = w.lambdas();
    let mut aux_sum = NeumaierSum::new();
    let mut num = NeumaierSum::new();
    let mut lhs = NeumaierSum::new();
    for i in 0..n {
        aux_sum.add(aux[i]);
        num.add(lam[i] * a[i]);
        let coef = aux[i].powf(p - 1.0) / lam[i].powf(p)
            - aux[i + 1].powf(p - 1.0) / lam[i + 1].powf(p);
        // Λ_n^p A_n^p = (Σ λ_k a_k)^p
        lhs.add(aux_sum.value().powf(1.0 - p) * coef * num.value().powf(p));
    }
    Ok(VerificationResult::new(lhs.value(), sum_pow(a, p), DEFAULT_VERIFY_TOL))
}

/// Inner averages `Σ_{k≤n} λ_k ∏_{i=k}^{n} b_i^{1/(p-1)} / Λ_n`, via
/// `T_n = b_n^{1/(p-1)} (T_{n-1} + λ_n)` in log domain.
pub fn inner_averages_54(w: &WeightSequence, e: &Exponent, b: &[f64]) -> Result<Vec<f64>> {
    check_positive(b, "b sequence")?;
    w.require("inner_averages_54", b.len())?;
    let p = e.p();
    let lam = w.lambdas();
    let big = w.prefix();
    let mut log_t = f64::NEG_INFINITY;
    Ok(b.iter()
        .enumerate()
        .map(|(i, &bi)| {
            log_t = bi.ln() / (p - 1.0) + log_add_exp(log_t, lam[i].ln());
            (log_t - big[i].ln()).exp()
        })
        .collect())
}

/// `Σ_n avg_n^{-(p-1)} (b_n/λ_n − 1/λ_{n+1}) Λ_n A_n^p ≤ Σ a_n^p`, with
/// `avg_n` from [`inner_averages_54`]. Needs `N+1` weights.
pub fn verify_54(
    w: &WeightSequence,
    e: &Exponent,
    a: &[f64],
    b: &[f64],
) -> Result<VerificationResult> {
    let n = a.len();
    check_nonnegative(a, "verify_54")?;
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    w.require("verify_54", n + 1)?;
    let p = e.p();
    let avg = inner_averages_54(w, e, b)?;
    let means = weighted_averages(w, a)?;
    let lam = w.lambdas();
    let big = w.prefix();
    let lhs: NeumaierSum = (0..n)
        .map(|i| {
            let coef = (b[i] / lam[i] - 1.0 / lam[i + 1]) * big[i];
            avg[i].powf(1.0 - p) * coef * means[i].powf(p)
        })
        .collect();
    Ok(VerificationResult::new(lhs.value(), sum_pow(a, p), DEFAULT_VERIFY_TOL))
}

/// Coefficients
/// `c_n = ((1/n) Σ_{k≤n} ∏_{i=k}^{n} (1 + (1-1/p)/i)^{1/(p-1)})^{-(p-1)}`
/// for n = 1..len.
pub fn hardy_improvement_coefficients(e: &Exponent, len: usize) -> Vec<f64> {
    let p = e.p();
    let shift = 1.0 - 1.0 / p;
    let mut log_t = f64::NEG_INFINITY;
    (1..=len)
        .map(|n| {
            let nf = n as f64;
            log_t = (shift / nf).ln_1p() / (p - 1.0) + log_add_exp(log_t, 0.0);
            ((1.0 - p) * (log_t - nf.ln())).exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyImprovement {
    pub result: VerificationResult,
    /// `(p/(p-1))^p Σ a^p − Σ (mean_n)^p`, the slack of the classical form.
    pub classical_slack: f64,
    #[serde(skip)]
    pub coefficients: Vec<f64>,
}

/// `Σ c_n (mean of a_1..a_n)^p ≤ (p/(p-1)) Σ a_n^p`.
pub fn verify_hardy_improvement(e: &Exponent, a: &[f64]) -> Result<HardyImprovement> {
    check_nonnegative(a, "verify_hardy_improvement")?;
    let p = e.p();
    let coefficients = hardy_improvement_coefficients(e, a.len());
    let mut run = NeumaierSum::new();
    let mut lhs = NeumaierSum::new();
    let mut plain = NeumaierSum::new();
    for (i, (&x, &c)) in a.iter().zip(&coefficients).enumerate() {
        run.add(x);
        let mean_p = (run.value() / (i + 1) as f64).powf(p);
        lhs.add(c * mean_p);
        plain.add(mean_p);
    }
    let sum_a = sum_pow(a, p);
    let result = VerificationResult::new(lhs.value(), e.q() * sum_a, DEFAULT_VERIFY_TOL);
    Ok(HardyImprovement {
        result,
        classical_slack: e.q().powf(p) * sum_a - plain.value(),
        coefficients,
    })
}
