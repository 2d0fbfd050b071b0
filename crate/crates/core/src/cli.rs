//! Command-line front end: `bounds`, `norm`, `verify` and `sweep`.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    bennett_e, cartlidge_l, check_local_condition, check_thm31, m_log, m_sum, min_l_local,
    min_l_thm31, BoundReport, Trend,
};
use crate::error::{Error, Result};
use crate::harness::{run_trials, summarize, Inequality, TrialConfig};
use crate::opnorm::{
    brute_force_norm, build_section, norm_estimate, DEFAULT_MAX_ITER, DEFAULT_NORM_TOL,
    DEFAULT_VERIFY_TOL,
};
use crate::report::{Cell, Report, Summary};
use crate::weights::{make_weights, Exponent, WeightSequence, WeightSpec};

pub const THREADS_ENV: &str = "HARDY_BOUNDS_THREADS";
/// Slack allowed when comparing a norm lower bound with an upper bound.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "hardy-bounds", version, about = "lp norm bounds for weighted mean matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// const | power:alpha=<real> | harmonic | file:<path> | list:<v1,v2,..>
    #[arg(long, global = true, default_value = "const")]
    pub weights: String,
    /// Number of terms (default depends on the command)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long = "L", global = true)]
    pub l: Option<f64>,
    #[arg(long = "M", global = true)]
    pub m: Option<f64>,
    /// Inequality for `verify`: ps, 52, 53, 54, weighted-hardy,
    /// improved-bennett, improved-expm, hardy-improved, or all
    #[arg(long, global = true, default_value = "all")]
    pub ineq: String,
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Override the command's tolerance (verifier slack, or power-iteration
    /// stopping rule for `norm`/`sweep`)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sweep axis: p, alpha or n
    #[arg(long, global = true)]
    pub axis: Option<String>,
    /// Comma-separated sweep values
    #[arg(long, global = true, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Table of bound constants and feasibility conditions
    Bounds,
    /// Lower and upper bounds on the finite-section norm
    Norm,
    /// Seeded random verification of the inequalities
    Verify,
    /// Bound constants and norm estimates across a parameter axis
    Sweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Norm => "norm",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Resolved run parameters, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub weight_spec: String,
    pub n_terms: usize,
    pub p: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub ineq: String,
    pub seed: u64,
    pub trials: usize,
    pub output_format: Format,
    pub tol: Option<f64>,
    pub axis: Option<String>,
    pub values: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let n_terms = cli.n.unwrap_or(match cli.command {
            Command::Bounds | Command::Sweep => 1000,
            Command::Norm => 100,
            Command::Verify => 50,
        });
        if n_terms == 0 {
            return Err(Error::Domain("--n must be at least 1".into()));
        }
        if let Some(p) = cli.p {
            Exponent::new(p)?;
        }
        if let Some(t) = cli.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Domain(format!("--tol {t} must be positive")));
            }
        }
        if cli.command == Command::Verify && cli.trials == 0 {
            return Err(Error::Domain("--trials must be at least 1".into()));
        }
        Ok(Self {
            command: cli.command,
            weight_spec: cli.weights.clone(),
            n_terms,
            p: cli.p,
            l: cli.l,
            m: cli.m,
            ineq: cli.ineq.clone(),
            seed: cli.seed,
            trials: cli.trials,
            output_format: cli.format,
            tol: cli.tol,
            axis: cli.axis.clone(),
            values: cli.values.clone(),
        })
    }

    fn exponent_or_default(&self) -> Result<Exponent> {
        Exponent::new(self.p.unwrap_or(2.0))
    }

    fn weights(&self, n: usize) -> Result<WeightSequence> {
        make_weights(&self.weight_spec.parse::<WeightSpec>()?, n)
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Bounds => cmd_bounds(cfg),
        Command::Norm => cmd_norm(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

fn new_report(cfg: &RunConfig, columns: Vec<&'static str>) -> Report {
    Report {
        command: cfg.command.name().to_string(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        columns,
        rows: Vec::new(),
        summary: Summary {
            pass: true,
            worst_residual: None,
            seed: cfg.seed,
            worst_seed: None,
        },
        warnings: Vec::new(),
    }
}

fn tail_warning(rep: &BoundReport, n_terms: usize) -> Option<String> {
    (rep.trend == Trend::IncreasingTail && rep.feasible.is_none()).then(|| {
        format!(
            "warning: {} is still increasing at the end of the prefix (n = {}); {} is a lower estimate of the supremum",
            rep.method.name(),
            n_terms - 1,
            rep.value
        )
    })
}

fn implied(e: Option<&Exponent>, l: f64) -> Cell {
    match e {
        Some(e) if l < e.p() => e.implied_bound(l).into(),
        _ => Cell::Empty,
    }
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Report> {
    let w = cfg.weights(cfg.n_terms)?;
    let e = cfg.p.map(Exponent::new).transpose()?;
    let mut report = new_report(
        cfg,
        vec![
            "method",
            "value",
            "argmax",
            "trend",
            "feasible",
            "implied_norm_bound",
            "carleman_constant",
        ],
    );

    if w.n_terms() >= 2 {
        let sups = [
            (cartlidge_l(&w)?, true),
            (bennett_e(&w)?, false),
            (m_log(&w)?, true),
            (m_sum(&w)?, true),
        ];
        for (rep, exp_const) in sups {
            let is_l = rep.method == crate::bounds::Method::CartlidgeL;
            let feasible = match (&e, is_l) {
                (Some(e), true) => Some(rep.value < e.p()),
                _ => None,
            };
            let carleman = if exp_const { rep.value.exp() } else { rep.value };
            report.push(vec![
                rep.method.name().into(),
                rep.value.into(),
                rep.argmax.into(),
                rep.trend.name().into(),
                feasible.into(),
                if is_l { implied(e.as_ref(), rep.value) } else { Cell::Empty },
                carleman.into(),
            ]);
            report.warnings.extend(tail_warning(&rep, w.n_terms()));
        }
    } else {
        report
            .warnings
            .push("warning: supremum constants need at least 2 terms".into());
    }

    if let Some(e) = e {
        if let Some(l) = cfg.l {
            for rep in [check_local_condition(&w, &e, l)?, check_thm31(&w, &e, l)?] {
                report.push(vec![
                    rep.method.name().into(),
                    rep.value.into(),
                    rep.argmax.into(),
                    rep.trend.name().into(),
                    rep.feasible.into(),
                    if rep.feasible == Some(true) { implied(Some(&e), l) } else { Cell::Empty },
                    Cell::Empty,
                ]);
            }
        }
        for (name, l) in [("MinLLocal", min_l_local(&w, &e)), ("MinLThm31", min_l_thm31(&w, &e))] {
            report.push(vec![
                name.into(),
                l.into(),
                Cell::Empty,
                Cell::Empty,
                Some(l.is_some()).into(),
                l.map_or(Cell::Empty, |l| implied(Some(&e), l)),
                Cell::Empty,
            ]);
        }
    }
    Ok(report)
}

/// Upper bounds `p/(p-L)` from each criterion that is feasible on the prefix.
pub fn upper_bounds(w: &WeightSequence, e: &Exponent) -> Vec<(&'static str, f64, f64)> {
    let mut out = Vec::new();
    if let Ok(rep) = cartlidge_l(w) {
        if rep.value > 0.0 && rep.value < e.p() {
            out.push(("CartlidgeL", rep.value, e.implied_bound(rep.value)));
        }
    }
    if let Some(l) = min_l_local(w, e) {
        out.push(("MinLLocal", l, e.implied_bound(l)));
    }
    if let Some(l) = min_l_thm31(w, e) {
        out.push(("MinLThm31", l, e.implied_bound(l)));
    }
    out
}

pub fn cmd_norm(cfg: &RunConfig) -> Result<Report> {
    let e = cfg.exponent_or_default()?;
    let w = cfg.weights(cfg.n_terms)?;
    let section = build_section(&w, cfg.n_terms)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_NORM_TOL);
    let est = norm_estimate(&section, &e, tol, DEFAULT_MAX_ITER)?;
    let mut report = new_report(
        cfg,
        vec!["kind", "method", "value", "L", "iterations", "converged"],
    );
    report.push(vec![
        "lower".into(),
        "PowerIteration".into(),
        est.value.into(),
        Cell::Empty,
        est.iterations.into(),
        est.converged.into(),
    ]);
    if !est.converged {
        report.warnings.push(format!(
            "warning: power iteration stopped after {} iterations (relative change {:e})",
            est.iterations, est.rel_change
        ));
    }
    if section.size() <= 4 {
        let brute = brute_force_norm(&section, &e)?;
        report.push(vec![
            "oracle".into(),
            "BruteForce".into(),
            brute.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    let uppers = upper_bounds(&w, &e);
    for (name, l, bound) in &uppers {
        report.push(vec![
            "upper".into(),
            (*name).into(),
            (*bound).into(),
            (*l).into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    if let Some(best) = uppers.iter().map(|u| u.2).reduce(f64::min) {
        let gap = best - est.value;
        report.summary.worst_residual = Some(gap);
        report.summary.pass = gap >= -SANDWICH_SLACK;
    } else {
        report
            .warnings
            .push("warning: no criterion yields an upper bound on this prefix".into());
    }
    Ok(report)
}

fn threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report> {
    let selected: Vec<Inequality> = if cfg.ineq == "all" {
        Inequality::ALL.to_vec()
    } else {
        vec![cfg.ineq.parse()?]
    };
    let trial_cfg = TrialConfig {
        n_max: cfg.n_terms,
        p: cfg.p,
        tol: cfg.tol.unwrap_or(DEFAULT_VERIFY_TOL),
    };
    let mut report = new_report(
        cfg,
        vec![
            "ineq",
            "trials",
            "passed",
            "worst_residual",
            "worst_scaled_residual",
            "worst_seed",
        ],
    );
    let mut worst: Option<(f64, f64, u64)> = None;
    for ineq in selected {
        let outcomes = run_trials(ineq, cfg.seed, cfg.trials, &trial_cfg, threads())?;
        let s = summarize(ineq, &outcomes);
        report.push(vec![
            ineq.name().into(),
            s.trials.into(),
            s.passed.into(),
            s.worst_residual.into(),
            s.worst_scaled_residual.into(),
            s.worst_seed.into(),
        ]);
        report.summary.pass &= s.all_pass();
        if worst.is_none_or(|(scaled, _, _)| s.worst_scaled_residual < scaled) {
            worst = Some((s.worst_scaled_residual, s.worst_residual, s.worst_seed));
        }
    }
    if let Some((_, raw, seed)) = worst {
        report.summary.worst_residual = Some(raw);
        report.summary.worst_seed = Some(seed);
    }
    Ok(report)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Report> {
    let axis = cfg.axis.as_deref().unwrap_or("p");
    let values = match (&cfg.values, axis) {
        (Some(v), _) => v.clone(),
        (None, "p") => vec![1.25, 1.5, 2.0, 3.0, 4.0],
        (None, "alpha") => vec![0.0, 0.5, 1.0, 2.0],
        (None, "n") => vec![10.0, 100.0, 1000.0],
        (None, other) => return Err(Error::Domain(format!("invalid sweep axis `{other}`"))),
    };
    if !matches!(axis, "p" | "alpha" | "n") {
        return Err(Error::Domain(format!("invalid sweep axis `{axis}` (expected p, alpha or n)")));
    }
    let tol = cfg.tol.unwrap_or(DEFAULT_NORM_TOL);
    let mut report = new_report(
        cfg,
        vec![
            axis_column(axis),
            "p",
            "n",
            "cartlidge_L",
            "m_log",
            "m_sum",
            "bennett_E",
            "min_L_local",
            "min_L_thm31",
            "implied_bound",
            "implied_bound_thm31",
            "norm_lower",
            "converged",
        ],
    );
    let mut trends = Vec::new();
    for v in values {
        let (spec, n, p) = match axis {
            "p" => (cfg.weight_spec.parse()?, cfg.n_terms, v),
            "alpha" => (WeightSpec::power(v), cfg.n_terms, cfg.p.unwrap_or(2.0)),
            _ => {
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(Error::Domain(format!("sweep n value {v} is not a positive integer")));
                }
                (cfg.weight_spec.parse()?, v as usize, cfg.p.unwrap_or(2.0))
            }
        };
        let e = Exponent::new(p)?;
        let w = make_weights(&spec, n)?;
        let sups = if n >= 2 {
            let reps = [cartlidge_l(&w)?, m_log(&w)?, m_sum(&w)?, bennett_e(&w)?];
            trends.extend(reps.iter().filter_map(|r| tail_warning(r, n)));
            Some(reps.map(|r| r.value))
        } else {
            None
        };
        let local = min_l_local(&w, &e);
        let global = min_l_thm31(&w, &e);
        let est = norm_estimate(&build_section(&w, n)?, &e, tol, DEFAULT_MAX_ITER)?;
        let s = |i: usize| -> Cell { sups.map(|v| v[i]).into() };
        report.push(vec![
            v.into(),
            p.into(),
            n.into(),
            s(0),
            s(1),
            s(2),
            s(3),
            local.into(),
            global.into(),
            sups.map_or(Cell::Empty, |v| implied(Some(&e), v[0])),
            global.map_or(Cell::Empty, |l| implied(Some(&e), l)),
            est.value.into(),
            est.converged.into(),
        ]);
    }
    trends.dedup();
    report.warnings = trends;
    Ok(report)
}

fn axis_column(axis: &str) -> &'static str {
    match axis {
        "p" => "axis_p",
        "alpha" => "axis_alpha",
        _ => "axis_n",
    }
}

/// Renders a report in the configured format.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    }
}
