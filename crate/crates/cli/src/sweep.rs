//! Scaling sweeps: first-hit step counts across an `eps` or `n` axis and a
//! log-log slope against the rate table's exponent.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use zoh_core::bounds::budget_order;

use crate::config::{plan_for, ExperimentConfig};
use crate::output::{sci, write_atomic, write_json};
use crate::run::run_seed;
use crate::{CliError, Outcome, SCHEMA_VERSION};

pub const CSV_HEADER: [&str; 7] =
    ["axis_value", "seed", "N_hit", "censored", "min_grad_f_sq", "min_grad_fmu_sq", "oracle_calls"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eps,
    N,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRow {
    pub axis_value: f64,
    pub seed: u64,
    pub n_hit: Option<u64>,
    pub censored: bool,
    pub min_grad_f_sq: f64,
    pub min_grad_fmu_sq: Option<f64>,
    pub oracle_calls: u64,
    pub planned_n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub axis_value: f64,
    pub planned_n: u64,
    pub mean_n_hit: Option<f64>,
    pub censored_seeds: usize,
    /// Any seed censored; such cells are left out of the fit.
    pub censored: bool,
    /// Some seed needed more than the planned `N` steps.
    pub exceeds_plan: bool,
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn axis_of(cfg: &ExperimentConfig) -> Result<(Axis, Vec<f64>), CliError> {
    match (&cfg.sweep.eps, &cfg.sweep.n) {
        (Some(e), None) if !e.is_empty() => Ok((Axis::Eps, e.clone())),
        (None, Some(n)) if !n.is_empty() => Ok((Axis::N, n.iter().map(|&v| v as f64).collect())),
        _ => Err(CliError::usage("sweep needs exactly one non-empty axis: sweep.eps or sweep.n")),
    }
}

pub fn sweep_cells(cfg: &ExperimentConfig) -> Result<(Axis, Vec<CellRow>), CliError> {
    let (axis, values) = axis_of(cfg)?;
    let horizon_factor = cfg.sweep.horizon_factor.unwrap_or(1.0);
    if !(horizon_factor >= 1.0) {
        return Err(CliError::usage("horizon factor must be >= 1"));
    }
    let cells: Vec<(usize, u64)> =
        (0..values.len()).flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s))).collect();
    let rows: Vec<Result<CellRow, CliError>> = cells
        .par_iter()
        .map(|&(i, seed)| {
            let v = values[i];
            let (problem, eps) = match axis {
                Axis::Eps => (cfg.build_problem()?, v),
                Axis::N => (cfg.problem_with_n(v as usize)?, cfg.eps_grad),
            };
            let plan = plan_for(cfg, &problem, eps)?;
            let mut long = plan.clone();
            long.n_steps = (plan.n_steps as f64 * horizon_factor).ceil() as u64;
            let mut opts = cfg.run_options();
            opts.stop_grad_sq = Some(eps);
            opts.record_steps = false;
            let (_, r) = run_seed(cfg, &problem, &long, seed, &opts)?;
            let row = CellRow {
                axis_value: v,
                seed,
                n_hit: r.n_hit,
                censored: r.n_hit.is_none(),
                min_grad_f_sq: r.min_grad_f_sq,
                min_grad_fmu_sq: r.min_grad_fmu_sq,
                oracle_calls: r.oracle_calls,
                planned_n: plan.n_steps,
            };
            write_atomic(&cfg.out.join("sweep_cells").join(format!("cell{i}_seed{seed}.csv")), &csv_bytes(std::slice::from_ref(&row))?)?;
            Ok(row)
        })
        .collect();
    Ok((axis, rows.into_iter().collect::<Result<_, _>>()?))
}

pub fn csv_bytes(rows: &[CellRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.axis_value.to_string(),
            r.seed.to_string(),
            r.n_hit.map(|k| k.to_string()).unwrap_or_default(),
            r.censored.to_string(),
            r.min_grad_f_sq.to_string(),
            r.min_grad_fmu_sq.map(|v| v.to_string()).unwrap_or_default(),
            r.oracle_calls.to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn summarize(rows: &[CellRow]) -> Vec<CellSummary> {
    let mut values: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    values.dedup();
    values
        .into_iter()
        .map(|v| {
            let cell: Vec<&CellRow> = rows.iter().filter(|r| r.axis_value == v).collect();
            let hits: Vec<f64> = cell.iter().filter_map(|r| r.n_hit).map(|k| k as f64).collect();
            let censored_seeds = cell.len() - hits.len();
            CellSummary {
                axis_value: v,
                planned_n: cell[0].planned_n,
                mean_n_hit: (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64),
                censored_seeds,
                censored: censored_seeds > 0,
                exceeds_plan: cell.iter().any(|r| r.n_hit.is_some_and(|k| k > r.planned_n)),
            }
        })
        .collect()
}

pub fn predicted_slope(cfg: &ExperimentConfig, axis: Axis) -> Result<Option<f64>, CliError> {
    let Some(theorem) = cfg.policy.theorem() else {
        return Ok(None);
    };
    let nu = cfg.build_problem()?.holder.nu;
    let q = Ratio::<i64>::approximate_float(nu).ok_or_else(|| CliError::usage("nu is not representable"))?;
    let order = budget_order(theorem, q);
    let e = match axis {
        Axis::Eps => order.eps,
        Axis::N => order.n,
    };
    Ok(Some(*e.numer() as f64 / *e.denom() as f64))
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (axis, rows) = sweep_cells(cfg)?;
    write_atomic(&cfg.out.join("sweep.csv"), &csv_bytes(&rows)?)?;
    let cells = summarize(&rows);
    let mut warnings = Vec::new();
    let censored: Vec<f64> = cells.iter().filter(|c| c.censored).map(|c| c.axis_value).collect();
    if !censored.is_empty() {
        warnings.push(format!("censored cells left out of the fit: {censored:?}"));
    }
    let fit: Vec<(f64, f64)> =
        cells.iter().filter(|c| !c.censored).filter_map(|c| c.mean_n_hit.map(|m| (c.axis_value, m))).collect();
    let slope = log_log_slope(&fit);
    if slope.is_none() {
        warnings.push("fewer than two uncensored cells with positive N_hit; no slope".into());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let predicted = predicted_slope(cfg, axis)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "problem": cfg.problem,
        "policy": cfg.policy,
        "axis": axis,
        "horizon_factor": cfg.sweep.horizon_factor.unwrap_or(1.0),
        "measured_slope": slope,
        "predicted_slope": predicted,
        "fitted_cells": fit.len(),
        "cells": cells,
        "warnings": warnings,
    });
    write_json(&cfg.out.join("sweep_slopes.json"), &summary)?;
    say!("{:>12} {:>12} {:>14} {:>9}", "axis", "planned N", "mean N_hit", "censored");
    for c in &cells {
        let m = c.mean_n_hit.map(sci).unwrap_or_else(|| "-".into());
        say!("{:>12} {:>12} {:>14} {:>9}", sci(c.axis_value), c.planned_n, m, c.censored_seeds);
    }
    say!(
        "slope measured {}  predicted {}",
        slope.map(sci).unwrap_or_else(|| "n/a".into()),
        predicted.map(|p| p.to_string()).unwrap_or_else(|| "n/a".into())
    );
    Ok(Outcome::ok(summary))
}
