//! Exit criteria. Runs every criterion, prints one PASS/FAIL line each, and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use hardy_bounds::bounds::{
    bennett_e, cartlidge_l, check_local_condition, check_thm31, m_log, m_sum, min_l_local,
    min_l_thm31, BISECTION_TOL,
};
use hardy_bounds::carleman::{make_b, BStrategy};
use hardy_bounds::harness::{run_trials, summarize, Inequality, InstanceRng, TrialConfig};
use hardy_bounds::opnorm::{
    brute_force_norm, build_section, hardy_improvement_coefficients, inner_averages_54,
    norm_estimate, verify_hardy_improvement, DEFAULT_MAX_ITER, DEFAULT_NORM_TOL,
};
use hardy_bounds::{make_weights, Exponent, WeightSequence, WeightSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let w = make_weights(&WeightSpec::Constant, 1_000_000).map_err(|e| e.to_string())?;
    let rep = cartlidge_l(&w).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(1))?;
    ensure(rep.value == 1.0, || format!("cartlidge_L = {}", rep.value))?;
    let bound = exponent(2.0).implied_bound(rep.value);
    ensure(bound == 2.0, || format!("implied bound {bound}"))?;
    Ok(format!("L = {}, p/(p-L) = {bound} at N = 10^6 in {:?}", rep.value, start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let w = make_weights(&WeightSpec::Constant, 10_000).unwrap();
    let m = m_log(&w).unwrap().value;
    let e = bennett_e(&w).unwrap().value;
    within(start, Duration::from_secs(1))?;
    ensure(m > 0.9999 && m < 1.0, || format!("m_log = {m}"))?;
    ensure(m.exp() > 2.71801 && m.exp() < 2.71829, || format!("e^m_log = {}", m.exp()))?;
    ensure(e > 2.70 && e < 2.71829, || format!("bennett_E = {e}"))?;
    let seq: Vec<f64> = [10, 100, 1000, 10_000]
        .iter()
        .map(|&n| bennett_e(&make_weights(&WeightSpec::Constant, n).unwrap()).unwrap().value)
        .collect();
    ensure(seq.windows(2).all(|p| p[0] < p[1]), || format!("bennett_E not increasing: {seq:?}"))?;
    Ok(format!("m_log = {m:.8}, e^m = {:.6}, bennett_E = {e:.6}", m.exp()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut families: Vec<(String, WeightSequence)> = vec![
        ("const".into(), make_weights(&WeightSpec::Constant, 4).unwrap()),
        ("power(1)".into(), make_weights(&WeightSpec::power(1.0), 4).unwrap()),
    ];
    for s in 0..20 {
        families.push((format!("random#{s}"), InstanceRng::new(1000 + s, 0).rough_weights(4)));
    }
    let mut worst = 0.0f64;
    for (name, w) in &families {
        for n in 1..=4 {
            for p in [1.5, 2.0, 3.0] {
                let e = exponent(p);
                let a = build_section(w, n).unwrap();
                let est = norm_estimate(&a, &e, DEFAULT_NORM_TOL, DEFAULT_MAX_ITER).unwrap();
                let brute = brute_force_norm(&a, &e).unwrap();
                let gap = (est.value - brute).abs();
                worst = worst.max(gap);
                ensure(gap <= 1e-6, || {
                    format!("{name} N={n} p={p}: power {} vs brute {brute}", est.value)
                })?;
            }
        }
    }
    let exact = ((1.5 + 1.25f64.sqrt()) / 2.0).sqrt();
    let a = build_section(&families[0].1, 2).unwrap();
    let est = norm_estimate(&a, &exponent(2.0), DEFAULT_NORM_TOL, DEFAULT_MAX_ITER).unwrap();
    ensure((est.value - exact).abs() <= 1e-6, || format!("Cesàro 2x2: {}", est.value))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("264 cases, max |power - brute| = {worst:.2e}; Cesàro 2x2 = {:.8}", est.value))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let specs = [
        WeightSpec::Constant,
        WeightSpec::power(0.5),
        WeightSpec::power(1.0),
        WeightSpec::power(2.0),
    ];
    let sizes: Vec<usize> = (0..=12).map(|k| 1usize << k).collect();
    let mut min_gap = f64::INFINITY;
    for spec in &specs {
        let full = make_weights(spec, 4096).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let e = exponent(p);
            let mut prev = 0.0;
            for &n in &sizes {
                let w = full.truncate(n).unwrap();
                let est = norm_estimate(&build_section(&w, n).unwrap(), &e, DEFAULT_NORM_TOL, DEFAULT_MAX_ITER)
                    .unwrap();
                let l = min_l_thm31(&w, &e).ok_or_else(|| format!("{spec} p={p} N={n}: no feasible L"))?;
                let upper = e.implied_bound(l);
                ensure(est.value <= upper + 1e-9, || {
                    format!("{spec} p={p} N={n}: lower {} > upper {upper}", est.value)
                })?;
                ensure(est.value >= prev, || {
                    format!("{spec} p={p}: norm decreased at N={n}: {} < {prev}", est.value)
                })?;
                min_gap = min_gap.min(upper - est.value);
                prev = est.value;
            }
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("156 sections, min(upper - lower) = {min_gap:.3e}"))
}

fn criterion_5() -> Outcome {
    let mut checks = 0usize;
    for s in 0..100u64 {
        let mut rng = InstanceRng::new(5000 + s, 0);
        let w = if s % 2 == 0 {
            rng.rough_weights(200)
        } else {
            rng.smooth_weights(200, -0.5, 3.0)
        };
        let l0 = cartlidge_l(&w).unwrap().value;
        let ml = m_log(&w).unwrap().value;
        let ms = m_sum(&w).unwrap().value;
        ensure(ml <= l0, || format!("seq {s}: m_log {ml} > L {l0}"))?;
        ensure(ms <= l0 + 1e-12 * l0.abs().max(1.0), || format!("seq {s}: m_sum {ms} > L {l0}"))?;
        checks += 2;
        for p in [1.5, 2.0, 3.0] {
            let e = exponent(p);
            let local_ok = |l: f64| check_local_condition(&w, &e, l).unwrap().feasible == Some(true);
            let global_ok = |l: f64| {
                check_thm31(&w, &e, l).map(|r| r.feasible == Some(true)).unwrap_or(false)
            };
            if l0 < p {
                ensure(local_ok(l0), || format!("seq {s} p={p}: Cartlidge L={l0} not locally feasible"))?;
                checks += 1;
            }
            let mut grid: Vec<f64> = (1..40).map(|k| p * k as f64 / 40.0).collect();
            if l0 < p {
                grid.push(l0);
            }
            for l in grid {
                if local_ok(l) {
                    ensure(global_ok(l), || format!("seq {s} p={p}: L={l} local but not global"))?;
                    checks += 1;
                }
            }
            let local = min_l_local(&w, &e);
            let global = min_l_thm31(&w, &e);
            for (l, ok) in [(local, &local_ok as &dyn Fn(f64) -> bool), (global, &global_ok)] {
                if let Some(l) = l {
                    ensure(ok(l), || format!("seq {s} p={p}: infeasible at bisection result {l}"))?;
                    let below = l - 10.0 * BISECTION_TOL;
                    if below > BISECTION_TOL {
                        ensure(!ok(below), || format!("seq {s} p={p}: feasible below L*={l}"))?;
                    }
                    checks += 1;
                }
            }
            if let (Some(g), Some(loc)) = (global, local) {
                ensure(g <= loc + BISECTION_TOL, || format!("seq {s} p={p}: thm31 {g} > local {loc}"))?;
                checks += 1;
            }
            if let (Some(loc), true) = (local, l0 < p) {
                ensure(loc <= l0 + BISECTION_TOL, || format!("seq {s} p={p}: local {loc} > L {l0}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} implications checked, 0 violations"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let cfg = TrialConfig::default();
    let mut lines = Vec::new();
    for ineq in Inequality::ALL {
        let out = run_trials(ineq, 42, 1000, &cfg, 1).map_err(|e| e.to_string())?;
        let s = summarize(ineq, &out);
        ensure(s.all_pass(), || format!("{ineq}: {}/{} pass", s.passed, s.trials))?;
        for o in &out {
            ensure(o.result.residual >= -1e-12 * o.result.rhs.abs(), || {
                format!("{ineq} seed {}: residual {} rhs {}", o.seed, o.result.residual, o.result.rhs)
            })?;
        }
        lines.push(format!("{ineq} {:.1e}", s.worst_scaled_residual));
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("8 x 1000 pass; worst scaled residuals: {}", lines.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut worst_avg = 0.0f64;
    let mut worst_id = 0.0f64;
    for spec in [WeightSpec::Constant, WeightSpec::power(1.0)] {
        let w = make_weights(&spec, 101).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let e = exponent(p);
            for l in [0.25, 0.5, 1.0, p * 0.9] {
                let b = make_b(&BStrategy::ThmOneOne { l, p }, &w).unwrap();
                let target = e.implied_bound(l);
                for avg in inner_averages_54(&w, &e, &b).unwrap() {
                    let rel = (avg - target).abs() / target;
                    worst_avg = worst_avg.max(rel);
                    ensure(rel <= 1e-10, || format!("{spec} p={p} L={l}: avg {avg} vs {target}"))?;
                }
                let b = make_b(&BStrategy::ThmThreeOne { l, p }, &w).unwrap();
                let lam = w.lambdas();
                let big = w.prefix();
                for (i, bi) in b.iter().enumerate() {
                    let lhs = big[i] * (bi / lam[i] - 1.0 / lam[i + 1]);
                    let err = (lhs - (1.0 - l / p)).abs();
                    worst_id = worst_id.max(err);
                    ensure(err <= 1e-12, || format!("{spec} p={p} L={l} n={}: {lhs}", i + 1))?;
                }
            }
        }
    }
    Ok(format!("inner-average rel err {worst_avg:.1e}, b-identity abs err {worst_id:.1e}"))
}

fn criterion_8() -> Outcome {
    let e = exponent(2.0);
    let c = hardy_improvement_coefficients(&e, 1000);
    ensure(c.iter().all(|&v| v >= 0.5), || "some c_n < 1/2".into())?;
    ensure((c[0] - 2.0 / 3.0).abs() <= 1e-12, || format!("c_1 = {}", c[0]))?;
    let a: Vec<f64> = (1..=1000).map(|n| 1.0 / n as f64).collect();
    let res = verify_hardy_improvement(&e, &a).unwrap();
    let mut run = 0.0;
    let plain: f64 = a
        .iter()
        .enumerate()
        .map(|(i, x)| {
            run += x;
            (run / (i + 1) as f64).powi(2)
        })
        .sum();
    let scaled_plain = e.q().powf(1.0 - e.p()) * plain;
    ensure(res.result.lhs > scaled_plain, || {
        format!("improved lhs {} not above scaled plain {scaled_plain}", res.result.lhs)
    })?;
    ensure(res.result.pass, || "improved inequality failed".into())?;
    let min_c = c.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "c_1 = {:.15}, min c_n = {min_c:.6}, lhs {:.6} > {scaled_plain:.6}",
        c[0], res.result.lhs
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("Cesàro constants", criterion_1),
        ("Carleman constant recovery", criterion_2),
        ("power iteration vs brute force", criterion_3),
        ("sandwich and nested monotonicity", criterion_4),
        ("implication chain", criterion_5),
        ("inequality property suites", criterion_6),
        ("identity reproduction", criterion_7),
        ("Hardy improvement strictness", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
