//! Seeded random instances for the inequality verifiers.
//!
//! Every trial draws everything it needs (N, p, weights, sequences) from a
//! ChaCha stream seeded by `base_seed + trial`, so any instance can be
//! replayed from its reported seed alone.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{cartlidge_l, m_log, min_l_thm31};
use crate::carleman::{verify_52, verify_improved_bennett, verify_improved_expm, verify_ps};
use crate::error::{Error, Result};
use crate::opnorm::{
    verify_53, verify_54, verify_hardy_improvement, verify_weighted_hardy, VerificationResult,
};
use crate::weights::{Exponent, WeightSequence};

pub const P_CHOICES: [f64; 3] = [1.5, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Inequality {
    Ps,
    Eq52,
    Eq53,
    Eq54,
    WeightedHardy,
    ImprovedBennett,
    ImprovedExpM,
    HardyImproved,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::Ps,
        Inequality::Eq52,
        Inequality::Eq53,
        Inequality::Eq54,
        Inequality::WeightedHardy,
        Inequality::ImprovedBennett,
        Inequality::ImprovedExpM,
        Inequality::HardyImproved,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Inequality::Ps => "ps",
            Inequality::Eq52 => "52",
            Inequality::Eq53 => "53",
            Inequality::Eq54 => "54",
            Inequality::WeightedHardy => "weighted-hardy",
            Inequality::ImprovedBennett => "improved-bennett",
            Inequality::ImprovedExpM => "improved-expm",
            Inequality::HardyImproved => "hardy-improved",
        }
    }

    fn stream(&self) -> u64 {
        Self::ALL.iter().position(|i| i == self).unwrap() as u64 + 1
    }

    pub fn uses_p(&self) -> bool {
        matches!(
            self,
            Inequality::Eq53 | Inequality::Eq54 | Inequality::WeightedHardy | Inequality::HardyImproved
        )
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown inequality `{s}`")))
    }
}

/// Random building blocks.
pub struct InstanceRng(ChaCha8Rng);

impl InstanceRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn size(&mut self, max: usize) -> usize {
        self.0.gen_range(1..=max.max(1))
    }

    pub fn pick_p(&mut self) -> f64 {
        P_CHOICES[self.0.gen_range(0..P_CHOICES.len())]
    }

    pub fn coin(&mut self) -> bool {
        self.0.gen_bool(0.5)
    }

    /// `exp(U(-r, r))` entries.
    pub fn log_uniform(&mut self, n: usize, r: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-r, r).exp()).collect()
    }

    /// `λ_n = exp(U(-2, 2))`.
    pub fn rough_weights(&mut self, n: usize) -> WeightSequence {
        WeightSequence::new(self.log_uniform(n, 2.0)).expect("positive weights")
    }

    /// `λ_n = (n + s)^α` with `α ∈ U(alpha_lo, alpha_hi)`, `s ∈ U(0, 5)`.
    pub fn smooth_weights(&mut self, n: usize, alpha_lo: f64, alpha_hi: f64) -> WeightSequence {
        let alpha = self.uniform(alpha_lo, alpha_hi);
        let shift = self.uniform(0.0, 5.0);
        WeightSequence::new((1..=n).map(|k| (k as f64 + shift).powf(alpha)).collect())
            .expect("positive weights")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    /// Sizes are drawn from `1..=n_max`.
    pub n_max: usize,
    /// Fixed exponent; drawn from [`P_CHOICES`] when absent.
    pub p: Option<f64>,
    pub tol: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_max: 50,
            p: None,
            tol: crate::opnorm::DEFAULT_VERIFY_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub p: Option<f64>,
    #[serde(flatten)]
    pub result: VerificationResult,
}

impl TrialOutcome {
    /// Residual relative to `max(1, |rhs|)`.
    pub fn scaled_residual(&self) -> f64 {
        self.result.residual / self.result.rhs.abs().max(1.0)
    }
}

/// Runs one seeded instance of `ineq`.
pub fn run_trial(ineq: Inequality, seed: u64, cfg: &TrialConfig) -> Result<TrialOutcome> {
    let mut rng = InstanceRng::new(seed, ineq.stream());
    let n = rng.size(cfg.n_max);
    let p = if ineq.uses_p() {
        Some(cfg.p.unwrap_or_else(|| rng.pick_p()))
    } else {
        None
    };
    let e = p.map(Exponent::new).transpose()?;
    let a = rng.log_uniform(n, 3.0);

    let result = match ineq {
        Inequality::Ps => {
            let w = rng.rough_weights(n);
            let raw = rng.log_uniform(n, 1.0);
            // half the trials shrink log b by R_n so b^{R_n} stays moderate
            let b = if rng.coin() {
                raw
            } else {
                raw.iter()
                    .zip(w.ratios())
                    .map(|(b, r)| (b.ln() / r).exp())
                    .collect()
            };
            verify_ps(&w, &a, &b)?
        }
        Inequality::Eq52 => {
            let w = rng.rough_weights(n + 1);
            let b = rng.log_uniform(n, 1.0);
            verify_52(&w, &a, &b)?
        }
        Inequality::Eq53 => {
            let w = rng.rough_weights(n + 1);
            let aux = rng.log_uniform(n + 1, 1.0);
            verify_53(&w, e.as_ref().unwrap(), &a, &aux)?
        }
        Inequality::Eq54 => {
            let w = rng.rough_weights(n + 1);
            let b = rng.log_uniform(n, 1.0);
            verify_54(&w, e.as_ref().unwrap(), &a, &b)?
        }
        Inequality::WeightedHardy => {
            let e = e.unwrap();
            let w = rng.smooth_weights(n + 1, 0.0, 3.0);
            let l = if rng.coin() {
                cartlidge_l(&w)?.value
            } else {
                min_l_thm31(&w, &e).ok_or_else(|| Error::Domain("no feasible L".into()))?
            };
            verify_weighted_hardy(&w, &e, &a, l)?
        }
        Inequality::ImprovedBennett => {
            let w = rng.rough_weights(n + 1);
            let floor = -(w.lambdas()[1] / w.prefix()[1]).ln();
            let l = floor + rng.uniform(0.01, 2.0);
            verify_improved_bennett(&w, &a, l)?.result
        }
        Inequality::ImprovedExpM => {
            let w = rng.smooth_weights(n + 1, 0.0, 3.0);
            let lam = w.lambdas();
            let floor = m_log(&w)?.value.max((lam[0] / lam[1]).ln_1p());
            let m = floor + rng.uniform(0.0, 0.5);
            verify_improved_expm(&w, &a, m, m)?.result
        }
        Inequality::HardyImproved => {
            verify_hardy_improvement(e.as_ref().unwrap(), &a)?.result
        }
    };
    Ok(TrialOutcome {
        trial: 0,
        seed,
        n,
        p,
        result: result.with_tolerance(cfg.tol),
    })
}

/// Runs `trials` instances with seeds `base_seed + i`, in parallel when
/// `threads > 1`; results come back in trial order.
pub fn run_trials(
    ineq: Inequality,
    base_seed: u64,
    trials: usize,
    cfg: &TrialConfig,
    threads: usize,
) -> Result<Vec<TrialOutcome>> {
    let one = |i: usize| {
        run_trial(ineq, base_seed.wrapping_add(i as u64), cfg).map(|mut o| {
            o.trial = i;
            o
        })
    };
    if threads <= 1 {
        return (0..trials).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(one).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub ineq: Inequality,
    pub trials: usize,
    pub passed: usize,
    pub worst_residual: f64,
    pub worst_scaled_residual: f64,
    pub worst_seed: u64,
}

impl TrialSummary {
    pub fn all_pass(&self) -> bool {
        self.passed == self.trials
    }
}

pub fn summarize(ineq: Inequality, outcomes: &[TrialOutcome]) -> TrialSummary {
    let worst = outcomes
        .iter()
        .min_by(|a, b| a.scaled_residual().total_cmp(&b.scaled_residual()));
    TrialSummary {
        ineq,
        trials: outcomes.len(),
        passed: outcomes.iter().filter(|o| o.result.pass).count(),
        worst_residual: worst.map_or(0.0, |o| o.result.residual),
        worst_scaled_residual: worst.map_or(0.0, |o| o.scaled_residual()),
        worst_seed: worst.map_or(0, |o| o.seed),
    }
}
