//! Cross-checks against independent high-precision or closed-form
//! evaluations.

use astro_float::{BigFloat, Consts, RoundingMode};
use hardy_bounds::bounds::{bennett_e, m_log, m_sum};
use hardy_bounds::carleman::{carleman_ratio, geo_means};
use hardy_bounds::harness::InstanceRng;
use hardy_bounds::opnorm::{build_section, norm_estimate, DEFAULT_MAX_ITER};
use hardy_bounds::{make_weights, Exponent, WeightSequence, WeightSpec};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

const PREC: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn harmonic_prefix_sums_match_exact_rationals() {
    let w = make_weights(&WeightSpec::Harmonic, 1500).unwrap();
    let mut exact = BigRational::zero();
    for (lam, got) in w.lambdas().iter().zip(w.prefix()) {
        exact += BigRational::from_float(*lam).unwrap();
        let want = exact.to_f64().unwrap();
        assert!(rel(*got, want) <= 2.0 * f64::EPSILON, "{got} vs {want}");
    }
}

#[test]
fn integer_prefix_sums_are_exact_at_a_million() {
    let n = 1_000_000usize;
    let c = make_weights(&WeightSpec::Constant, n).unwrap();
    let lin = make_weights(&WeightSpec::power(1.0), n).unwrap();
    for i in (0..n).step_by(997).chain([n - 1]) {
        let k = (i + 1) as u64;
        assert_eq!(c.prefix()[i], k as f64);
        let tri: BigInt = BigInt::from(k) * BigInt::from(k + 1) / 2u32;
        assert_eq!(lin.prefix()[i], tri.to_f64().unwrap());
    }
}

fn bennett_direct(w: &WeightSequence) -> f64 {
    let mut cc = Consts::new().unwrap();
    let lam: Vec<BigFloat> = w.lambdas().iter().map(|&x| big(x)).collect();
    let mut prefix = Vec::with_capacity(lam.len());
    let mut acc = big(0.0);
    for l in &lam {
        acc = acc.add(l, PREC, RM);
        prefix.push(acc.clone());
    }
    let ratio = |i: usize| prefix[i].div(&lam[i], PREC, RM);
    let mut best = f64::NEG_INFINITY;
    for n in 0..lam.len() - 1 {
        let mut prod = ratio(n + 1);
        for k in 0..=n {
            let base = lam[k].div(&prefix[k], PREC, RM);
            let expo = lam[k].div(&prefix[n], PREC, RM);
            prod = prod.mul(&base.pow(&expo, PREC, RM, &mut cc), PREC, RM);
        }
        best = best.max(to_f64(&prod));
    }
    best
}

#[test]
fn bennett_constant_matches_direct_product() {
    for seed in 0..6u64 {
        let mut rng = InstanceRng::new(seed, 7);
        let w = if seed % 2 == 0 {
            rng.rough_weights(100)
        } else {
            rng.smooth_weights(100, -0.5, 3.0)
        };
        let got = bennett_e(&w).unwrap().value;
        let want = bennett_direct(&w);
        assert!(rel(got, want) <= 1e-12, "seed {seed}: {got} vs {want}");
    }
    let c = make_weights(&WeightSpec::Constant, 100).unwrap();
    assert!(rel(bennett_e(&c).unwrap().value, bennett_direct(&c)) <= 1e-12);
}

#[test]
fn geo_means_match_high_precision() {
    let mut cc = Consts::new().unwrap();
    let mut rng = InstanceRng::new(99, 3);
    let w = rng.rough_weights(50);
    let a = rng.log_uniform(50, 4.0);
    let got = geo_means(&w, &a).unwrap().values;
    let mut log_num = big(0.0);
    let mut den = big(0.0);
    for (i, (lam, x)) in w.lambdas().iter().zip(&a).enumerate() {
        log_num = log_num.add(&big(*lam).mul(&big(*x).ln(PREC, RM, &mut cc), PREC, RM), PREC, RM);
        den = den.add(&big(*lam), PREC, RM);
        let want = to_f64(&log_num.div(&den, PREC, RM).exp(PREC, RM, &mut cc));
        assert!(rel(got[i], want) <= 1e-13, "n={}: {} vs {want}", i + 1, got[i]);
    }
}

#[test]
fn cesaro_three_by_three_matches_singular_value() {
    let w = make_weights(&WeightSpec::Constant, 3).unwrap();
    let a = build_section(&w, 3).unwrap();
    let dense = a.to_dense();
    let m = DMatrix::from_fn(3, 3, |i, j| dense[i][j]);
    let eig = (m.transpose() * &m).symmetric_eigen();
    let sigma = eig.eigenvalues.max().sqrt();
    let est = norm_estimate(&a, &Exponent::new(2.0).unwrap(), 1e-12, DEFAULT_MAX_ITER).unwrap();
    assert!((est.value - sigma).abs() <= 1e-9, "{} vs {sigma}", est.value);
    assert!((sigma - 1.2217).abs() <= 1e-3);
}

#[test]
fn two_norm_matches_singular_value_for_random_sections() {
    for seed in 0..10u64 {
        let w = InstanceRng::new(seed, 11).rough_weights(12);
        let a = build_section(&w, 12).unwrap();
        let dense = a.to_dense();
        let m = DMatrix::from_fn(12, 12, |i, j| dense[i][j]);
        let sigma = m.singular_values().max();
        let est = norm_estimate(&a, &Exponent::new(2.0).unwrap(), 1e-12, DEFAULT_MAX_ITER).unwrap();
        assert!((est.value - sigma).abs() <= 1e-8 * sigma, "seed {seed}: {} vs {sigma}", est.value);
    }
}

// Stationary point of sum G_n / sum a_n for Cesàro means: a_k is proportional
// to sum_{n>=k} G_n/n.
fn carleman_maximizer(n: usize) -> Vec<f64> {
    let w = make_weights(&WeightSpec::Constant, n).unwrap();
    let mut a: Vec<f64> = (1..=n).map(|k| 1.0 / (k * (k + 1)) as f64).collect();
    for _ in 0..300 {
        let g = geo_means(&w, &a).unwrap().values;
        let mut tail = 0.0;
        for k in (0..n).rev() {
            tail += g[k] / (k + 1) as f64;
            a[k] = tail;
        }
        let s: f64 = a.iter().sum();
        a.iter_mut().for_each(|x| *x /= s);
    }
    a
}

#[test]
fn near_extremal_carleman_ratio() {
    let n = 10_000;
    let w = make_weights(&WeightSpec::Constant, n).unwrap();
    let a = carleman_maximizer(n);
    let ratio = carleman_ratio(&w, &a).unwrap();
    assert!(ratio > 2.42 && ratio < std::f64::consts::E, "{ratio}");
    let naive: Vec<f64> = (1..=n).map(|k| 1.0 / (k * (k + 1)) as f64).collect();
    assert!(carleman_ratio(&w, &naive).unwrap() < ratio);
    let cap = bennett_e(&w)
        .unwrap()
        .value
        .min(m_log(&w).unwrap().value.exp())
        .min(m_sum(&w).unwrap().value.exp());
    assert!(ratio <= cap + 1e-9);
}
