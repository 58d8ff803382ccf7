//! Executes a checked scenario: one job per coupling, fanned out over a
//! thread pool, with results assembled in configuration order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use qfp_core::coarse_grain::CoarseGrainSchedule;
use qfp_core::generator::{
    build_generator, k_t_oracle, qds_certificate_seeded, steady_state, GeneratorBundle,
};
use qfp_core::mat::{HermitianOperator, C64};
use qfp_core::scenarios::{
    gibbs_state, heat_bath_general, heat_bath_generator, qfgr_generator, sweep_errors_at,
    trace_distance,
};
use qfp_core::subsystem::PhysicalSubsystem;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Model, RawConfig, ScenarioConfig, ScenarioKind};

/// Largest allowed `|λ² K_T - oracle|`.
pub const ORACLE_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str = "lambda,t,error_norm,trace_dev,min_choi_eig,min_state_eig";

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Row {
    pub lambda: f64,
    pub t: f64,
    /// Missing when the sweep is disabled.
    pub error_norm: Option<f64>,
    pub trace_dev: f64,
    pub min_choi_eig: f64,
    pub min_state_eig: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyStateSummary {
    pub unique: bool,
    pub nullspace_dim: usize,
    pub separation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_distance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaResult {
    pub lambda: f64,
    pub coarse_graining_time: f64,
    pub certificate_passed: bool,
    pub max_trace_dev: f64,
    pub min_choi_eig: f64,
    pub min_state_eig: f64,
    pub max_semigroup_residual: f64,
    pub max_unitality_residual: f64,
    pub max_trace_norm_growth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_error_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qfgr_cross_check: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyStateSummary>,
    /// Human-readable descriptions of every failed invariant.
    pub witnesses: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RawConfig,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub results: Vec<LambdaResult>,
    /// Steady-state distances to the system Gibbs state, in coupling order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_distance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_monotone: Option<bool>,
    pub witnesses: Vec<String>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

/// Where the results went.
#[derive(Clone, Debug)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Per-coupling inputs prepared before the numerics start.
struct Job {
    schedule: CoarseGrainSchedule,
    times: Vec<f64>,
}

fn bundle_for(model: &Model, schedule: CoarseGrainSchedule) -> Result<(GeneratorBundle, Option<f64>)> {
    Ok(match model {
        Model::Qfgr(m) => {
            let mut m = m.clone();
            m.schedule = schedule;
            let sys = qfgr_generator(&m)?;
            (sys.bundle, Some(sys.cross_check_residual))
        }
        Model::HeatBath(m) => (heat_bath_generator(&m.with_schedule(schedule))?, None),
        Model::Custom(m) => (
            build_generator(Arc::new(m.subsystem.clone()), &m.h0, &m.hp, &schedule)?,
            None,
        ),
    })
}

/// Subsystem and Hamiltonians of the full (unreduced) problem.
fn full_problem(model: &Model) -> Result<(PhysicalSubsystem, HermitianOperator, HermitianOperator)> {
    Ok(match model {
        Model::Qfgr(m) => (m.subsystem()?, m.h0.clone(), m.hp.clone()),
        Model::HeatBath(m) => (m.subsystem()?, m.free_hamiltonian(), m.interaction()),
        Model::Custom(m) => (m.subsystem.clone(), m.h0.clone(), m.hp.clone()),
    })
}

fn run_lambda(cfg: &ScenarioConfig, job: &Job) -> Result<LambdaResult> {
    let sched = job.schedule;
    let lambda = sched.lambda;
    let (bundle, cross_check) = bundle_for(&cfg.model, sched)?;
    let mut witnesses = Vec::new();

    let report = qds_certificate_seeded(&bundle, &job.times, cfg.seed);
    for s in &report.samples {
        if !s.passed() {
            witnesses.push(format!(
                "certificate failed at t = {:e}: min Choi eig {:e}, unitality {:e}, trace dev {:e}, \
                 semigroup {:e}, trace-norm growth {:e}, operator-norm growth {:e}",
                s.t,
                s.min_choi_eigenvalue,
                s.unitality_residual,
                s.trace_deviation,
                s.semigroup_residual,
                s.trace_norm_growth,
                s.op_norm_growth
            ));
        }
    }

    let needs_full = cfg.checks.sweep || cfg.checks.oracle;
    let full = if needs_full { Some(full_problem(&cfg.model)?) } else { None };

    let errors = match (&full, cfg.checks.sweep) {
        (Some((sub, h0, hp)), true) => Some(sweep_errors_at(sub, h0, hp, &sched, &job.times)?),
        _ => None,
    };

    let oracle_residual = match (&full, cfg.checks.oracle) {
        (Some((sub, h0, hp)), true) => {
            let reference = match &cfg.model {
                Model::HeatBath(m) => heat_bath_general(&m.with_schedule(sched))?,
                _ => build_generator(Arc::new(sub.clone()), h0, hp, &sched)?,
            };
            let oracle = k_t_oracle(sub, h0, hp, sched.coarse_graining_time())?;
            let r = reference
                .second_order_on_image()
                .max_abs_diff(&oracle.scale(C64::from(lambda * lambda)));
            if r > ORACLE_TOL {
                witnesses.push(format!("oracle residual {r:e} exceeds {ORACLE_TOL:e}"));
            }
            Some(r)
        }
        _ => None,
    };

    let steady = if cfg.checks.steady_state {
        match steady_state(&bundle) {
            Ok(ss) => {
                let gibbs_distance = match &cfg.model {
                    Model::HeatBath(m) => {
                        let target = gibbs_state(&m.h_a, m.beta);
                        Some(trace_distance(ss.state.matrix(), target.matrix()))
                    }
                    _ => None,
                };
                Some(SteadyStateSummary {
                    unique: ss.unique,
                    nullspace_dim: ss.nullspace_dim,
                    separation: ss.separation,
                    gibbs_distance,
                })
            }
            Err(e) => {
                witnesses.push(format!("steady state: {e}"));
                None
            }
        }
    } else {
        None
    };

    let rows: Vec<Row> = report
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| Row {
            lambda,
            t: s.t,
            error_norm: errors.as_ref().map(|e| e[k].error),
            trace_dev: s.trace_deviation,
            min_choi_eig: s.min_choi_eigenvalue,
            min_state_eig: s.min_state_eigenvalue,
        })
        .collect();

    let fold_max = |f: &dyn Fn(&qfp_core::generator::QdsSample) -> f64| {
        report.samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    };
    let fold_min = |f: &dyn Fn(&qfp_core::generator::QdsSample) -> f64| {
        report.samples.iter().map(f).fold(f64::INFINITY, f64::min)
    };
    Ok(LambdaResult {
        lambda,
        coarse_graining_time: sched.coarse_graining_time(),
        certificate_passed: report.passed(),
        max_trace_dev: fold_max(&|s| s.trace_deviation),
        min_choi_eig: fold_min(&|s| s.min_choi_eigenvalue),
        min_state_eig: fold_min(&|s| s.min_state_eigenvalue),
        max_semigroup_residual: fold_max(&|s| s.semigroup_residual),
        max_unitality_residual: fold_max(&|s| s.unitality_residual),
        max_trace_norm_growth: fold_max(&|s| s.trace_norm_growth),
        sup_error_norm: errors.map(|e| e.iter().map(|p| p.error).fold(0.0, f64::max)),
        oracle_residual,
        qfgr_cross_check: cross_check,
        steady_state: steady,
        witnesses,
        rows,
    })
}

/// Distances ordered by decreasing coupling must decrease strictly.
fn strictly_improving(pairs: &[(f64, f64)]) -> bool {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    sorted.windows(2).all(|w| w[1].1 < w[0].1)
}

/// Runs every coupling of `cfg`. The result does not depend on the number
/// of worker threads.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunReport> {
    let started = Instant::now();
    let jobs: Vec<Job> = cfg
        .schedules
        .iter()
        .map(|&schedule| Job {
            schedule,
            times: cfg.time_grid.times(schedule.lambda),
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|job| {
            run_lambda(cfg, job).with_context(|| format!("coupling λ = {}", job.schedule.lambda))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut witnesses: Vec<String> = results
        .iter()
        .flat_map(|r| r.witnesses.iter().map(move |w| format!("λ = {}: {w}", r.lambda)))
        .collect();

    let (gibbs_distance, gibbs_monotone) = if cfg.kind == ScenarioKind::HeatBath && cfg.checks.steady_state {
        let pairs: Vec<(f64, f64)> = results
            .iter()
            .filter_map(|r| {
                r.steady_state
                    .as_ref()
                    .and_then(|s| s.gibbs_distance)
                    .map(|d| (r.lambda, d))
            })
            .collect();
        let monotone = pairs.len() == results.len() && strictly_improving(&pairs);
        if cfg.checks.gibbs_monotone && !monotone {
            witnesses.push(format!(
                "Gibbs distances are not strictly decreasing as λ decreases: {:?}",
                pairs
            ));
        }
        (Some(pairs.iter().map(|p| p.1).collect()), Some(monotone))
    } else {
        (None, None)
    };

    let mut config = cfg.raw.clone();
    config.seed = Some(cfg.seed);
    Ok(RunReport {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        scenario: cfg.kind,
        seed: cfg.seed,
        passed: witnesses.is_empty(),
        witnesses,
        results,
        gibbs_distance,
        gibbs_monotone,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(report: &RunReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in report.results.iter().flat_map(|r| &r.rows) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.lambda),
            num(r.t),
            r.error_norm.map(num).unwrap_or_else(|| "nan".into()),
            num(r.trace_dev),
            num(r.min_choi_eig),
            num(r.min_state_eig)
        );
    }
    out
}

/// Writes the CSV table, the JSON summary and, when requested, every
/// generator's matrices into `dir`.
pub fn write_outputs(cfg: &ScenarioConfig, report: &RunReport, dir: &Path) -> Result<Written> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv = dir.join(&cfg.output.csv);
    let json = dir.join(&cfg.output.json);
    std::fs::write(&csv, render_csv(report)).with_context(|| format!("writing {}", csv.display()))?;
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(&json, text + "\n").with_context(|| format!("writing {}", json.display()))?;
    if cfg.output.export_generators {
        for (i, sched) in cfg.schedules.iter().enumerate() {
            let (bundle, _) = bundle_for(&cfg.model, *sched)?;
            let sub = dir.join(format!("generator_{i}"));
            bundle.export(&sub).with_context(|| format!("exporting {}", sub.display()))?;
        }
    }
    Ok(Written { csv, json })
}
