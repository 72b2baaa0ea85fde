use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use zoh_core::solver::{evaluate_run, run_zo_gd, EvalOptions, Plan, RunOptions, RunRecord};
use zoh_core::{NoisyOracle, TestProblem};

use crate::config::{plan_for, ExperimentConfig};
use crate::output::{sci, write_atomic, write_json};
use crate::plan::plan_json;
use crate::{CliError, Outcome, EXIT_DIVERGENCE, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub delta: f64,
    pub steps_taken: u64,
    pub n_hit: Option<u64>,
    pub oracle_calls: u64,
    pub diverged: Option<u64>,
    pub ceiling_violated: bool,
    pub min_grad_f_sq: f64,
    pub min_grad_fmu_sq: Option<f64>,
    pub min_grad_fmu_sq_std_error: Option<f64>,
    pub final_fmu_gap: Option<f64>,
    pub final_fmu_gap_std_error: Option<f64>,
    pub func_gap_bound: f64,
}

/// Noise and evaluation streams derived from the run seed.
pub fn noise_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x6e_6f69_7365
}

/// One descent run plus its evaluation.
pub fn run_seed(
    cfg: &ExperimentConfig,
    problem: &TestProblem,
    plan: &Plan,
    seed: u64,
    options: &RunOptions,
) -> Result<(RunRecord, SeedResult), CliError> {
    let noise = cfg.noise.model(plan.delta_max, noise_seed(seed))?;
    let oracle = NoisyOracle::new(problem, noise);
    let space = zoh_core::NormSpace::identity(problem.n())?;
    let rec = run_zo_gd(&oracle, &space, plan, &problem.x0, seed, options)?;
    let eval_opts = EvalOptions {
        mc_samples: cfg.mc_samples,
        max_mc_points: cfg.max_mc_points,
        seed: noise_seed(seed) ^ 0xe7a1,
        final_gap: cfg.run.final_gap,
    };
    let ev = evaluate_run(&rec, problem, &space, &eval_opts)?;
    let res = SeedResult {
        seed,
        delta: rec.delta,
        steps_taken: rec.steps_taken,
        n_hit: rec.hit,
        oracle_calls: rec.oracle_calls,
        diverged: rec.diverged,
        ceiling_violated: rec.flagged,
        min_grad_f_sq: ev.min_grad_f_sq,
        min_grad_fmu_sq: ev.min_grad_fmu_sq,
        min_grad_fmu_sq_std_error: ev.min_grad_fmu_sq_std_error,
        final_fmu_gap: ev.final_fmu_gap.as_ref().map(|g| g.mean.abs()),
        final_fmu_gap_std_error: ev.final_fmu_gap.as_ref().map(|g| g.std_error),
        func_gap_bound: ev.func_gap_bound_at_mu,
    };
    Ok((rec, res))
}

fn stats<F: Fn(&SeedResult) -> Option<f64>>(rs: &[SeedResult], f: F) -> serde_json::Value {
    let v: Vec<f64> = rs.iter().filter_map(f).collect();
    if v.is_empty() {
        return json!(null);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({"mean": mean, "min": min, "max": max})
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let problem = cfg.build_problem()?;
    let plan = plan_for(cfg, &problem, cfg.eps_grad)?;
    let opts = cfg.run_options();
    let results: Vec<Result<SeedResult, CliError>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let (rec, res) = run_seed(cfg, &problem, &plan, seed, &opts)?;
            if opts.record_steps {
                let mut buf = Vec::new();
                rec.write_csv(&mut buf)?;
                write_atomic(&cfg.out.join(format!("run_seed{seed}.csv")), &buf)?;
            }
            Ok(res)
        })
        .collect();
    let results: Vec<SeedResult> = results.into_iter().collect::<Result<_, _>>()?;
    let diverged: Vec<u64> = results.iter().filter(|r| r.diverged.is_some()).map(|r| r.seed).collect();
    let violated = results.iter().any(|r| r.ceiling_violated);
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "plan": plan_json(cfg, &plan)["plan"],
        "delta": results[0].delta,
        "delta_max": plan.delta_max,
        "ceiling_violated": violated,
        "diverged_seeds": diverged,
        "aggregate": {
            "min_grad_f_sq": stats(&results, |r| Some(r.min_grad_f_sq)),
            "min_grad_fmu_sq": stats(&results, |r| r.min_grad_fmu_sq),
            "final_fmu_gap": stats(&results, |r| r.final_fmu_gap),
            "steps_taken": stats(&results, |r| Some(r.steps_taken as f64)),
            "oracle_calls": stats(&results, |r| Some(r.oracle_calls as f64)),
        },
        "seeds": results,
    });
    write_json(&cfg.out.join("run_summary.json"), &summary)?;
    let agg = &summary["aggregate"];
    say!(
        "{} seeds, planned N = {}; mean min |grad f|^2 = {}",
        results.len(),
        plan.n_steps,
        sci(agg["min_grad_f_sq"]["mean"].as_f64().unwrap_or(f64::NAN))
    );
    if let Some(m) = agg["min_grad_fmu_sq"]["mean"].as_f64() {
        say!("mean min |grad f_mu|^2 (MC) = {}", sci(m));
    }
    if violated {
        log::warn!("oracle noise {} exceeds delta_max {}", results[0].delta, plan.delta_max);
        say!("warning: noise level exceeds the plan's delta_max; guarantees do not apply");
    }
    let mut out = Outcome::ok(summary);
    if !diverged.is_empty() {
        log::error!("diverged seeds: {diverged:?}");
        out.exit_code = EXIT_DIVERGENCE;
    }
    Ok(out)
}
