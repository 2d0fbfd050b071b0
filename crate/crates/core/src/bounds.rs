//! Norm-bound constants and feasibility conditions for weighted mean
//! matrices, all evaluated on a finite prefix of the weights.
//!
//! Supremum-type constants are returned as the maximum over the available
//! prefix together with a [`Trend`] flag: when the maximum sits at the last
//! index and the tail is still rising, the reported value is only a lower
//! estimate of the true supremum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::{log_add_exp, NeumaierSum};
use crate::weights::{Exponent, WeightSequence};

/// Absolute tolerance on L for the minimal-L searches.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    CartlidgeL,
    BennettE,
    MLog,
    MSum,
    LocalCond,
    Thm31Cond,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::CartlidgeL => "CartlidgeL",
            Method::BennettE => "BennettE",
            Method::MLog => "MLog",
            Method::MSum => "MSum",
            Method::LocalCond => "LocalCond",
            Method::Thm31Cond => "Thm31Cond",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    IncreasingTail,
    AttainedInterior,
    Flat,
}

impl Trend {
    pub fn name(&self) -> &'static str {
        match self {
            Trend::IncreasingTail => "increasing_tail",
            Trend::AttainedInterior => "attained_interior",
            Trend::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: Method,
    /// Prefix supremum for constants; the tested L for condition checks.
    pub value: f64,
    /// `per_index[i]` belongs to `n = i + 1`.
    pub per_index: Vec<f64>,
    /// 1-based index. For condition checks this is the tightest index
    /// (smallest margin).
    pub argmax: usize,
    pub trend: Trend,
    pub feasible: Option<bool>,
}

impl BoundReport {
    fn supremum(method: Method, per_index: Vec<f64>) -> Self {
        let (value, argmax) = max_with_index(&per_index);
        let trend = classify_trend(&per_index, argmax);
        Self {
            method,
            value,
            per_index,
            argmax,
            trend,
            feasible: None,
        }
    }

    /// Condition reports: margins ≥ 0 everywhere means feasible. Trend is
    /// taken on the negated margins, so `IncreasingTail` flags a condition
    /// that is still tightening at the end of the prefix.
    fn condition(method: Method, l: f64, margins: Vec<f64>) -> Self {
        let feasible = margins.iter().all(|&m| m >= 0.0);
        let negated: Vec<f64> = margins.iter().map(|m| -m).collect();
        let (argmax, trend) = if negated.is_empty() {
            (0, Trend::Flat)
        } else {
            let (_, i) = max_with_index(&negated);
            (i, classify_trend(&negated, i))
        };
        Self {
            method,
            value: l,
            per_index: margins,
            argmax,
            trend,
            feasible: Some(feasible),
        }
    }
}

/// Max and smallest 1-based index attaining it. NaN entries win.
fn max_with_index(xs: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut at = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x.is_nan() {
            return (x, i + 1);
        }
        if x > best || at == 0 {
            best = x;
            at = i + 1;
        }
    }
    (best, at)
}

fn classify_trend(xs: &[f64], argmax: usize) -> Trend {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if xs.is_empty() || hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Trend::Flat;
    }
    let tail = &xs[xs.len().saturating_sub(3)..];
    if argmax == xs.len() && tail.windows(2).all(|w| w[0] <= w[1]) {
        Trend::IncreasingTail
    } else {
        Trend::AttainedInterior
    }
}

fn check_l(e: &Exponent, l: f64) -> Result<()> {
    if !(l > 0.0 && l < e.p()) {
        return Err(Error::Domain(format!(
            "L = {l} must lie in the open interval (0, p = {})",
            e.p()
        )));
    }
    Ok(())
}

/// Cartlidge's constant: `sup_n (R_{n+1} - R_n)` with `R_n = Λ_n/λ_n`.
pub fn cartlidge_l(w: &WeightSequence) -> Result<BoundReport> {
    w.require("cartlidge_L", 2)?;
    let r = w.ratios();
    let diffs = r.windows(2).map(|p| p[1] - p[0]).collect();
    Ok(BoundReport::supremum(Method::CartlidgeL, diffs))
}

/// Local condition
/// `R_{n+1} <= R_n (1 - L/(p R_n))^{1-p} + L/p` for n = 1..N-1.
/// Margins are RHS − LHS.
pub fn check_local_condition(w: &WeightSequence, e: &Exponent, l: f64) -> Result<BoundReport> {
    check_l(e, l)?;
    let p = e.p();
    let r = w.ratios();
    let mut margins = Vec::with_capacity(r.len().saturating_sub(1));
    for (i, pair) in r.windows(2).enumerate() {
        let (rn, rnext) = (pair[0], pair[1]);
        let x = l / (p * rn);
        if x >= 1.0 {
            return Err(Error::Domain(format!(
                "1 - Lλ_n/(pΛ_n) <= 0 at n = {}",
                i + 1
            )));
        }
        let rhs = rn * ((1.0 - p) * (-x).ln_1p()).exp() + l / p;
        margins.push(rhs - rnext);
    }
    Ok(BoundReport::condition(Method::LocalCond, l, margins))
}

/// Bennett's constant
/// `sup_n R_{n+1} ∏_{k≤n} (λ_k/Λ_k)^{λ_k/Λ_n}`, in log domain.
pub fn bennett_e(w: &WeightSequence) -> Result<BoundReport> {
    w.require("bennett_E", 2)?;
    let r = w.ratios();
    let lam = w.lambdas();
    let big = w.prefix();
    let mut inner = NeumaierSum::new();
    let per_index = (0..r.len() - 1)
        .map(|i| {
            inner.add(lam[i] * r[i].ln());
            (r[i + 1].ln() - inner.value() / big[i]).exp()
        })
        .collect();
    Ok(BoundReport::supremum(Method::BennettE, per_index))
}

/// `M = sup_n R_n log(R_{n+1}/R_n)`.
pub fn m_log(w: &WeightSequence) -> Result<BoundReport> {
    w.require("m_log", 2)?;
    let r = w.ratios();
    let per_index = r
        .windows(2)
        .map(|p| p[0] * ((p[1] - p[0]) / p[0]).ln_1p())
        .collect();
    Ok(BoundReport::supremum(Method::MLog, per_index))
}

/// `M = sup_n Σ_{k≤n} (λ_k/Λ_n)(R_{k+1} - R_k)`.
pub fn m_sum(w: &WeightSequence) -> Result<BoundReport> {
    w.require("m_sum", 2)?;
    let r = w.ratios();
    let lam = w.lambdas();
    let big = w.prefix();
    let mut num = NeumaierSum::new();
    let per_index = (0..r.len() - 1)
        .map(|i| {
            num.add(lam[i] * (r[i + 1] - r[i]));
            num.value() / big[i]
        })
        .collect();
    Ok(BoundReport::supremum(Method::MSum, per_index))
}

/// Partial sums `S_n = Σ_{k≤n} (λ_k/Λ_n) ∏_{i=k}^{n} f_i` for n = 1..N-1,
/// where `f_i = ((R_{i+1} - L/p)/R_i)^{1/(p-1)}`.
///
/// Uses `T_n = f_n (T_{n-1} + λ_n)`, `S_n = T_n/Λ_n`, carried as `log T_n`.
pub fn thm31_partial_sums(w: &WeightSequence, e: &Exponent, l: f64) -> Result<Vec<f64>> {
    check_l(e, l)?;
    let p = e.p();
    let r = w.ratios();
    let lam = w.lambdas();
    let big = w.prefix();
    let shift = l / p;
    let mut log_t = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(r.len().saturating_sub(1));
    for i in 0..r.len().saturating_sub(1) {
        let base = (r[i + 1] - shift) / r[i];
        if base.is_nan() || base <= 0.0 {
            return Err(Error::Domain(format!(
                "Λ_{{n+1}}/λ_{{n+1}} - L/p <= 0 at n = {} (factor base {base})",
                i + 1
            )));
        }
        log_t = base.ln() / (p - 1.0) + log_add_exp(log_t, lam[i].ln());
        out.push((log_t - big[i].ln()).exp());
    }
    Ok(out)
}

/// Global condition `S_n <= p/(p-L)` for n = 1..N-1; margins are
/// `p/(p-L) - S_n`.
pub fn check_thm31(w: &WeightSequence, e: &Exponent, l: f64) -> Result<BoundReport> {
    let sums = thm31_partial_sums(w, e, l)?;
    let cap = e.implied_bound(l);
    let margins = sums.into_iter().map(|s| cap - s).collect();
    Ok(BoundReport::condition(Method::Thm31Cond, l, margins))
}

/// Smallest L in `(0, p)` for which `feasible` holds, assuming feasibility
/// is monotone nondecreasing in L. Returns `None` when even
/// `L = p(1 - 1e-12)` is infeasible.
pub fn bisect_min_feasible<F>(e: &Exponent, feasible: F) -> Option<f64>
where
    F: Fn(f64) -> bool,
{
    let mut lo = BISECTION_TOL;
    let mut hi = e.p() * (1.0 - BISECTION_TOL);
    if !feasible(hi) {
        return None;
    }
    if feasible(lo) {
        return Some(lo);
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!(feasible(hi));
    Some(hi)
}

/// Minimal L satisfying the local condition on this prefix.
pub fn min_l_local(w: &WeightSequence, e: &Exponent) -> Option<f64> {
    bisect_min_feasible(e, |l| {
        check_local_condition(w, e, l)
            .map(|r| r.feasible == Some(true))
            .unwrap_or(false)
    })
}

/// Minimal L satisfying the global (suffix-product) condition on this
/// prefix. A nonpositive factor base counts as infeasible.
pub fn min_l_thm31(w: &WeightSequence, e: &Exponent) -> Option<f64> {
    bisect_min_feasible(e, |l| {
        check_thm31(w, e, l)
            .map(|r| r.feasible == Some(true))
            .unwrap_or(false)
    })
}
