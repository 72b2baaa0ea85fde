//! Zeroth-order descent `x_{k+1} = x_k − h B⁻¹ g_μ(x_k, u_k, δ)` with
//! theorem-backed parameter plans.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{self, APair, Branch, Theorem};
use crate::error::{check_dim, Error, Result};
use crate::objective::{HolderClass, Objective};
use crate::oracle::NoisyOracle;
use crate::problems::TestProblem;
use crate::sampler::GaussianSampler;
use crate::smoothing::{
    estimate_grad_f_mu, estimate_grad_f_mu_from_gradient, g_mu_coefficient, shifted, McEstimate, ScalarStats,
    SmoothingParams,
};
use crate::space::NormSpace;

/// Iterates further than this from the origin count as divergence.
pub const DIVERGENCE_RADIUS: f64 = 1e12;
/// Full trajectories are kept up to this many steps.
pub const THIN_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    T1,
    T2,
    NU1,
    #[serde(rename = "manual")]
    Manual,
}

impl Policy {
    pub fn theorem(self) -> Option<Theorem> {
        match self {
            Policy::T1 => Some(Theorem::T1),
            Policy::T2 => Some(Theorem::T2),
            Policy::NU1 => Some(Theorem::NU1),
            Policy::Manual => None,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.theorem() {
            Some(t) => f.write_str(t.as_str()),
            None => f.write_str("manual"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("manual") {
            return Ok(Policy::Manual);
        }
        Ok(match s.parse::<Theorem>()? {
            Theorem::T1 => Policy::T1,
            Theorem::T2 => Policy::T2,
            Theorem::NU1 => Policy::NU1,
        })
    }
}

/// Optional parameter overrides. A manual plan needs `mu`, `h` and `n_steps`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanOverrides {
    pub mu: Option<f64>,
    pub d: Option<f64>,
    pub h: Option<f64>,
    pub n_steps: Option<u64>,
    pub delta_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub policy: Policy,
    pub n: usize,
    pub holder: HolderClass,
    pub eps_grad: f64,
    pub mu: f64,
    pub d: f64,
    pub h: f64,
    pub n_steps: u64,
    pub delta_max: f64,
    pub apair: APair,
    /// `M` of the theorem, when a theorem policy is used.
    pub m_constant: Option<f64>,
    /// `f(x0) + func_gap_bound − f_star_lower` used for the budget.
    pub f_gap: Option<f64>,
}

pub fn make_plan(policy: Policy, problem: &TestProblem, eps_grad: f64, overrides: &PlanOverrides) -> Result<Plan> {
    if !(eps_grad > 0.0) {
        return Err(Error::usage(format!("target accuracy must be positive, got {eps_grad}")));
    }
    let holder = problem.holder;
    let n = problem.n();
    let Some(theorem) = policy.theorem() else {
        return manual_plan(problem, eps_grad, overrides);
    };
    theorem.check_nu(holder.nu)?;
    if !problem.f_star_lower.is_finite() {
        return Err(Error::usage("planning needs a finite lower bound f_star_lower"));
    }
    let mu0 = bounds::mu0(theorem, holder, n, eps_grad)?;
    let mu = match overrides.mu {
        Some(mu) if mu > 0.0 && mu <= mu0 => mu,
        Some(mu) => {
            return Err(Error::usage(format!("mu override {mu} must lie in (0, mu0 = {mu0}]")));
        }
        None => mu0,
    };
    let d = match theorem {
        Theorem::T2 => mu.powf(1.0 - holder.nu),
        Theorem::T1 | Theorem::NU1 => 1.0,
    };
    let apair = match theorem {
        Theorem::NU1 => bounds::a_pair(Branch::Refined, holder, mu, n, None)?,
        _ => bounds::a_pair(Branch::Smooth, holder, mu, n, None)?,
    };
    let h = bounds::step_size(d, n, apair.a1)?;
    let f_gap = problem.eval(&problem.x0) + bounds::func_gap_bound(holder, mu, n) - problem.f_star_lower;
    let n_steps = match overrides.n_steps {
        Some(k) => k,
        None => bounds::n_budget(theorem, holder, n, eps_grad, f_gap.max(0.0))?,
    };
    Ok(Plan {
        policy,
        n,
        holder,
        eps_grad,
        mu,
        d,
        h,
        n_steps,
        delta_max: bounds::delta_max(theorem, mu, n, holder.nu),
        apair,
        m_constant: Some(bounds::m_constant(theorem, holder, n)),
        f_gap: Some(f_gap),
    })
}

fn manual_plan(problem: &TestProblem, eps_grad: f64, o: &PlanOverrides) -> Result<Plan> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::usage(format!("manual plan requires {name}")));
    let mu = need(o.mu, "mu")?;
    let h = need(o.h, "h")?;
    let n_steps = o.n_steps.ok_or_else(|| Error::usage("manual plan requires n_steps"))?;
    let d = o.d.unwrap_or(1.0);
    if !(mu > 0.0) || !(h >= 0.0) || !(d > 0.0 && d <= 1.0) {
        return Err(Error::usage(format!("invalid manual plan: mu={mu}, h={h}, D={d}")));
    }
    let a1 = if h > 0.0 { d / (80.0 * (problem.n() as f64 + 4.0) * h) } else { f64::INFINITY };
    Ok(Plan {
        policy: Policy::Manual,
        n: problem.n(),
        holder: problem.holder,
        eps_grad,
        mu,
        d,
        h,
        n_steps,
        delta_max: o.delta_max.unwrap_or(f64::INFINITY),
        apair: APair { a1, a2: 0.0, branch: Branch::Smooth, delta_hat: None },
        m_constant: None,
        f_gap: None,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Thinning {
    /// All iterates up to `THIN_LIMIT` steps, else every `⌈N/THIN_LIMIT⌉`-th
    /// plus every running minimum of the estimator norm.
    #[default]
    Auto,
    All,
    Every(u64),
}

impl Thinning {
    fn stride(self, n_steps: u64) -> u64 {
        match self {
            Thinning::All => 1,
            Thinning::Every(k) => k.max(1),
            Thinning::Auto if n_steps <= THIN_LIMIT => 1,
            Thinning::Auto => n_steps.div_ceil(THIN_LIMIT),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub thinning: Thinning,
    /// Stop at the first `k` with `‖∇f(x_k)‖*² ≤ stop_grad_sq` (analytic gradient).
    pub stop_grad_sq: Option<f64>,
    /// Reuse `f̃(x_k, δ)` while the iterate is unchanged; otherwise every step
    /// spends two calls.
    pub cache_base: bool,
    /// Keep per-step `f̃` and `‖g‖*` sequences.
    pub record_steps: bool,
    /// Run only the first `max_steps` of the planned steps.
    pub max_steps: Option<u64>,
}

impl RunOptions {
    pub fn new() -> Self {
        Self { record_steps: true, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub plan: Plan,
    pub seed: u64,
    pub delta: f64,
    /// Step indices of the retained iterates.
    pub iterate_steps: Vec<u64>,
    pub iterates: Vec<Vec<f64>>,
    /// `‖g_μ(x_k, u_k, δ)‖*` per step.
    pub g_norms: Vec<f64>,
    /// `f̃(x_k, δ)` per step.
    pub f_noisy: Vec<f64>,
    pub steps_taken: u64,
    pub oracle_calls: u64,
    pub final_x: Vec<f64>,
    /// Last finite step index when the run diverged.
    pub diverged: Option<u64>,
    /// First step meeting the stop rule.
    pub hit: Option<u64>,
    /// `δ > δ_max` of the plan.
    pub flagged: bool,
}

impl RunRecord {
    /// One row per step: `k, f_noisy, g_norm` and, for `n ≤ 16`, the retained
    /// iterate's coordinates (empty for thinned steps).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let n = self.plan.n;
        let with_x = n <= 16;
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["k".to_string(), "f_noisy".into(), "g_norm".into()];
        if with_x {
            header.extend((0..n).map(|i| format!("x{i}")));
        }
        let io = |e: csv::Error| Error::Usage(format!("writing run CSV: {e}"));
        out.write_record(&header).map_err(io)?;
        let mut next = 0;
        for k in 0..self.g_norms.len() {
            let mut row = vec![k.to_string(), self.f_noisy[k].to_string(), self.g_norms[k].to_string()];
            if with_x {
                while next < self.iterate_steps.len() && self.iterate_steps[next] < k as u64 {
                    next += 1;
                }
                if next < self.iterate_steps.len() && self.iterate_steps[next] == k as u64 {
                    row.extend(self.iterates[next].iter().map(|v| v.to_string()));
                } else {
                    row.extend(std::iter::repeat_n(String::new(), n));
                }
            }
            out.write_record(&row).map_err(io)?;
        }
        out.flush().map_err(|e| Error::Usage(format!("writing run CSV: {e}")))?;
        Ok(())
    }
}

/// Runs `plan.n_steps` steps of the descent from `x0` with directions drawn
/// from `GaussianSampler::new(space, seed)`.
pub fn run_zo_gd<O: Objective>(
    oracle: &NoisyOracle<O>,
    space: &NormSpace,
    plan: &Plan,
    x0: &[f64],
    seed: u64,
    options: &RunOptions,
) -> Result<RunRecord> {
    let n = space.dim();
    check_dim(n, x0.len())?;
    check_dim(n, oracle.dim())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::usage("start point must be finite"));
    }
    let flagged = oracle.delta() > plan.delta_max;
    if flagged {
        log::warn!("oracle noise {} exceeds the plan's ceiling {}", oracle.delta(), plan.delta_max);
    }
    let base = oracle.base();
    if options.stop_grad_sq.is_some() && !base.has_gradient() {
        return Err(Error::usage("gradient stop rule needs an analytic gradient"));
    }
    let calls0 = oracle.calls();
    let mut sampler = GaussianSampler::new(space.clone(), seed);
    let horizon = options.max_steps.map_or(plan.n_steps, |m| m.min(plan.n_steps));
    let stride = options.thinning.stride(horizon);
    let cap = if options.record_steps { horizon.min(1 << 24) as usize } else { 0 };
    let mut rec = RunRecord {
        plan: plan.clone(),
        seed,
        delta: oracle.delta(),
        iterate_steps: Vec::new(),
        iterates: Vec::new(),
        g_norms: Vec::with_capacity(cap),
        f_noisy: Vec::with_capacity(cap),
        steps_taken: 0,
        oracle_calls: 0,
        final_x: x0.to_vec(),
        diverged: None,
        hit: None,
        flagged,
    };
    let mut x = x0.to_vec();
    let (mut u, mut scratch, mut grad) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut best_g = f64::INFINITY;
    let mut cached_fx: Option<(Vec<f64>, f64)> = None;
    let mu = plan.mu;
    for k in 0..horizon {
        if let Some(eps) = options.stop_grad_sq {
            base.grad_into(&x, &mut grad);
            if space.dual_sq(&grad) <= eps {
                rec.hit = Some(k);
                rec.iterate_steps.push(k);
                rec.iterates.push(x.clone());
                break;
            }
        }
        sampler.fill(&mut u);
        let fx = match cached_fx {
            Some((ref at, v)) if options.cache_base && at == &x => v,
            _ => oracle.query(&x)?,
        };
        if options.cache_base {
            cached_fx = Some((x.clone(), fx));
        }
        let c = g_mu_coefficient(oracle, &x, &u, mu, Some(fx), &mut scratch)?;
        let g_norm = c.abs() * space.primal_sq(&u).sqrt();
        if options.record_steps {
            rec.f_noisy.push(fx);
            rec.g_norms.push(g_norm);
        }
        if k % stride == 0 || g_norm < best_g {
            rec.iterate_steps.push(k);
            rec.iterates.push(x.clone());
        }
        best_g = best_g.min(g_norm);
        let step = plan.h * c;
        for (xi, ui) in x.iter_mut().zip(&u) {
            *xi -= step * ui;
        }
        rec.steps_taken = k + 1;
        if x.iter().any(|v| !v.is_finite()) || space.primal_sq(&x).sqrt() > DIVERGENCE_RADIUS {
            rec.diverged = Some(k);
            break;
        }
        rec.final_x.copy_from_slice(&x);
    }
    if let (Some(eps), None, None) = (options.stop_grad_sq, rec.hit, rec.diverged) {
        base.grad_into(&x, &mut grad);
        if space.dual_sq(&grad) <= eps {
            rec.hit = Some(rec.steps_taken);
            rec.iterate_steps.push(rec.steps_taken);
            rec.iterates.push(x.clone());
        }
    }
    rec.oracle_calls = oracle.calls() - calls0;
    Ok(rec)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub mc_samples: usize,
    /// Cap on the number of retained iterates that get a Monte-Carlo estimate;
    /// the points with the smallest `‖∇f‖*²` plus an even spread are chosen.
    pub max_mc_points: Option<usize>,
    pub seed: u64,
    /// Also estimate `|f_μ − f|` at the final iterate.
    pub final_gap: bool,
}

impl EvalOptions {
    pub fn new(mc_samples: usize) -> Self {
        Self { mc_samples, max_mc_points: None, seed: 0, final_gap: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunEvaluation {
    pub min_grad_f_sq: f64,
    pub argmin_grad_f: u64,
    /// Plug-in `‖mean‖*²`, biased upward; `None` without Monte-Carlo samples.
    pub min_grad_fmu_sq: Option<f64>,
    pub min_grad_fmu_sq_std_error: Option<f64>,
    pub argmin_grad_fmu: Option<u64>,
    pub func_gap_bound_at_mu: f64,
    pub final_fmu_gap: Option<McEstimate<f64>>,
    pub points_evaluated: usize,
}

pub fn evaluate_run(record: &RunRecord, problem: &TestProblem, space: &NormSpace, options: &EvalOptions) -> Result<RunEvaluation> {
    let has_grad = problem.has_gradient();
    if !has_grad && options.mc_samples == 0 {
        return Err(Error::usage("evaluation needs an analytic gradient or mc_samples > 0"));
    }
    let n = problem.n();
    let mu = record.plan.mu;
    let mut pts: Vec<(u64, &[f64])> =
        record.iterate_steps.iter().copied().zip(record.iterates.iter().map(|v| v.as_slice())).collect();
    if pts.is_empty() {
        pts.push((0, record.final_x.as_slice()));
    }
    let mut g = vec![0.0; n];
    let grad_sq: Vec<f64> = pts
        .iter()
        .map(|(_, x)| {
            if has_grad {
                problem.grad_into(x, &mut g);
                space.dual_sq(&g)
            } else {
                f64::NAN
            }
        })
        .collect();

    let mut eval = RunEvaluation {
        min_grad_f_sq: f64::INFINITY,
        argmin_grad_f: 0,
        min_grad_fmu_sq: None,
        min_grad_fmu_sq_std_error: None,
        argmin_grad_fmu: None,
        func_gap_bound_at_mu: bounds::func_gap_bound(problem.holder, mu, n),
        final_fmu_gap: None,
        points_evaluated: 0,
    };
    for (i, &v) in grad_sq.iter().enumerate() {
        if v < eval.min_grad_f_sq {
            eval.min_grad_f_sq = v;
            eval.argmin_grad_f = pts[i].0;
        }
    }

    if options.mc_samples >= 2 {
        let chosen = choose_points(&grad_sq, options.max_mc_points);
        let exact = NoisyOracle::exact(problem);
        let smoothing = SmoothingParams::new(mu, 0.0)?;
        let mut best = (f64::INFINITY, 0.0, 0);
        for (j, &i) in chosen.iter().enumerate() {
            let (k, x) = pts[i];
            let mut sampler = GaussianSampler::with_stream(space.clone(), options.seed, j as u64);
            let est = if has_grad {
                estimate_grad_f_mu_from_gradient(problem, x, mu, options.mc_samples, &mut sampler)?
            } else {
                estimate_grad_f_mu(&exact, x, &smoothing, options.mc_samples, &mut sampler)?
            };
            let sq = space.dual_sq(&est.mean);
            if sq < best.0 {
                best = (sq, 2.0 * sq.sqrt() * est.std_error_norm(space), k);
            }
        }
        eval.points_evaluated = chosen.len();
        eval.min_grad_fmu_sq = Some(best.0);
        eval.min_grad_fmu_sq_std_error = Some(best.1);
        eval.argmin_grad_fmu = Some(best.2);
        if options.final_gap {
            let mut sampler = GaussianSampler::with_stream(space.clone(), options.seed, u64::MAX);
            eval.final_fmu_gap =
                Some(estimate_smoothing_gap(problem, &record.final_x, mu, options.mc_samples, &mut sampler)?);
        }
    }
    Ok(eval)
}

fn choose_points(grad_sq: &[f64], cap: Option<usize>) -> Vec<usize> {
    let m = grad_sq.len();
    let cap = match cap {
        Some(c) if c < m => c.max(2),
        _ => return (0..m).collect(),
    };
    let mut order: Vec<usize> = (0..m).collect();
    if grad_sq.iter().all(|v| v.is_finite()) {
        order.sort_by(|&a, &b| grad_sq[a].total_cmp(&grad_sq[b]));
    }
    let mut chosen: Vec<usize> = order[..cap / 2].to_vec();
    let spread = cap - chosen.len();
    for j in 0..spread {
        chosen.push(j * (m - 1) / (spread - 1).max(1));
    }
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

/// `f_μ(x) − f(x)` via the antithetic average `(f(x+μu) + f(x−μu))/2 − f(x)`.
pub fn estimate_smoothing_gap<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    mu: f64,
    n_samples: usize,
    sampler: &mut GaussianSampler,
) -> Result<McEstimate<f64>> {
    let n = x.len();
    let fx = objective.eval(x);
    let (mut u, mut y) = (vec![0.0; n], vec![0.0; n]);
    let mut stats = ScalarStats::new();
    for _ in 0..n_samples.max(2) {
        sampler.fill(&mut u);
        shifted(x, mu, &u, &mut y);
        let a = objective.eval(&y);
        shifted(x, -mu, &u, &mut y);
        let b = objective.eval(&y);
        stats.push(0.5 * (a + b) - fx);
    }
    Ok(stats.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{NoiseKind, NoiseModel};
    use crate::problems::{build_problem, make_constant, make_holder_power, make_quadratic};

    fn quad8() -> TestProblem {
        build_problem("quadratic:n=8:spectrum=geom(1,10)").unwrap()
    }

    #[test]
    fn nu1_plan_scales_linearly() {
        let p8 = quad8();
        let plan = make_plan(Policy::NU1, &p8, 1e-2, &PlanOverrides::default()).unwrap();
        assert_eq!(plan.d, 1.0);
        assert_eq!(plan.apair.a1, 10.0);
        assert!((plan.h * 80.0 * 12.0 * plan.apair.a1 - plan.d).abs() <= 1e-12 * plan.d);
        assert!((plan.delta_max - plan.mu * plan.mu / 8f64.sqrt()).abs() < 1e-18);
        // the budget is proportional to (n+4)·f_gap, and f(x0) = 1 for every n
        let p16 = build_problem("quadratic:n=16:spectrum=geom(1,10)").unwrap();
        let plan16 = make_plan(Policy::NU1, &p16, 1e-2, &PlanOverrides::default()).unwrap();
        let ratio = plan16.n_steps as f64 / plan.n_steps as f64;
        let expected = 20.0 / 12.0 * plan16.f_gap.unwrap() / plan.f_gap.unwrap();
        assert!((ratio - expected).abs() < 1e-5, "{ratio} {expected}");
        let big = |n: usize| {
            let p = build_problem(&format!("quadratic:n={n}:spectrum=geom(1,10)")).unwrap();
            make_plan(Policy::NU1, &p, 1e-2, &PlanOverrides::default()).unwrap().n_steps as f64
        };
        let r = big(256) / big(128);
        assert!((1.8..=2.2).contains(&r), "{r}");
    }

    #[test]
    fn policy_nu_mismatch() {
        let hp = make_holder_power(4, 0.5, &[0.0; 4]).unwrap();
        assert!(matches!(make_plan(Policy::NU1, &hp, 0.1, &PlanOverrides::default()), Err(Error::Usage(_))));
        let t2 = make_plan(Policy::T2, &hp, 0.1, &PlanOverrides::default()).unwrap();
        assert!((t2.d - t2.mu.powf(0.5)).abs() < 1e-15);
        assert!((t2.h * 80.0 * 8.0 * t2.apair.a1 - t2.d).abs() <= 1e-12 * t2.d);
        let t1 = make_plan(Policy::T1, &hp, 0.1, &PlanOverrides::default()).unwrap();
        assert_eq!(t1.d, 1.0);
        assert!(t1.mu < 1.0);
        assert!(make_plan(Policy::T2, &hp, 0.0, &PlanOverrides::default()).is_err());
    }

    #[test]
    fn manual_plan_passes_through() {
        let p = quad8();
        let o = PlanOverrides { mu: Some(0.3), d: Some(0.5), h: Some(1e-3), n_steps: Some(77), delta_max: None };
        let plan = make_plan(Policy::Manual, &p, 0.1, &o).unwrap();
        assert_eq!((plan.mu, plan.d, plan.h, plan.n_steps), (0.3, 0.5, 1e-3, 77));
        assert!(make_plan(Policy::Manual, &p, 0.1, &PlanOverrides::default()).is_err());
    }

    #[test]
    fn mu_override_must_respect_mu0() {
        let p = quad8();
        let plan = make_plan(Policy::NU1, &p, 1e-2, &PlanOverrides::default()).unwrap();
        let half = PlanOverrides { mu: Some(plan.mu / 2.0), ..Default::default() };
        assert_eq!(make_plan(Policy::NU1, &p, 1e-2, &half).unwrap().mu, plan.mu / 2.0);
        let over = PlanOverrides { mu: Some(plan.mu * 2.0), ..Default::default() };
        assert!(make_plan(Policy::NU1, &p, 1e-2, &over).is_err());
    }

    fn manual(p: &TestProblem, h: f64, steps: u64) -> Plan {
        let o = PlanOverrides { mu: Some(0.01), d: None, h: Some(h), n_steps: Some(steps), delta_max: None };
        make_plan(Policy::Manual, p, 0.1, &o).unwrap()
    }

    #[test]
    fn zero_step_keeps_start() {
        let p = quad8();
        let space = NormSpace::identity(8).unwrap();
        let o = NoisyOracle::exact(p.clone());
        let rec = run_zo_gd(&o, &space, &manual(&p, 0.0, 50), &p.x0, 1, &RunOptions::new()).unwrap();
        assert!(rec.iterates.iter().all(|x| x == &p.x0));
        assert_eq!(rec.final_x, p.x0);
        assert_eq!(rec.g_norms.len(), 50);
        assert_eq!(rec.oracle_calls, 100);
        let cached = RunOptions { cache_base: true, ..RunOptions::new() };
        let rec = run_zo_gd(&o, &space, &manual(&p, 0.0, 50), &p.x0, 1, &cached).unwrap();
        assert_eq!(rec.oracle_calls, 50 + 1);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = quad8();
        let space = NormSpace::identity(8).unwrap();
        let plan = make_plan(Policy::NU1, &p, 1e-1, &PlanOverrides { n_steps: Some(2000), ..Default::default() }).unwrap();
        let noise = NoiseModel::new(NoiseKind::Uniform, plan.delta_max / 2.0, 3).unwrap();
        let a = run_zo_gd(&NoisyOracle::new(p.clone(), noise.clone()), &space, &plan, &p.x0, 42, &RunOptions::new()).unwrap();
        let b = run_zo_gd(&NoisyOracle::new(p.clone(), noise), &space, &plan, &p.x0, 42, &RunOptions::new()).unwrap();
        assert_eq!(a, b);
        assert!(!a.flagged);
    }

    #[test]
    fn ceiling_flag_and_divergence() {
        let p = quad8();
        let space = NormSpace::identity(8).unwrap();
        let plan = make_plan(Policy::NU1, &p, 1e-1, &PlanOverrides { n_steps: Some(10), ..Default::default() }).unwrap();
        let loud = NoiseModel::new(NoiseKind::AdversarialSign, plan.delta_max * 1e3, 3).unwrap();
        let rec = run_zo_gd(&NoisyOracle::new(p.clone(), loud), &space, &plan, &p.x0, 1, &RunOptions::new()).unwrap();
        assert!(rec.flagged);
        // a huge step blows up
        let o = NoisyOracle::exact(p.clone());
        let rec = run_zo_gd(&o, &space, &manual(&p, 1e6, 1000), &p.x0, 1, &RunOptions::new()).unwrap();
        let k = rec.diverged.expect("should diverge");
        assert!(rec.final_x.iter().all(|v| v.is_finite()));
        assert_eq!(rec.steps_taken, k + 1);
    }

    #[test]
    fn one_step_descent_on_average() {
        let p = make_quadratic(8, &[1.0; 8]).unwrap();
        let space = NormSpace::identity(8).unwrap();
        let plan = make_plan(Policy::NU1, &p, 1e-2, &PlanOverrides { n_steps: Some(1), ..Default::default() }).unwrap();
        let x0 = vec![5.0; 8];
        let o = NoisyOracle::exact(p.clone());
        let mut mean = 0.0;
        for seed in 0..200 {
            let rec = run_zo_gd(&o, &space, &plan, &x0, seed, &RunOptions::new()).unwrap();
            mean += p.eval(&rec.final_x) / 200.0;
        }
        assert!(mean < p.eval(&x0), "{mean}");
    }

    #[test]
    fn converged_run_satisfies_transfer_chain() {
        let p = quad8();
        let space = NormSpace::identity(8).unwrap();
        let plan = make_plan(Policy::NU1, &p, 1e-1, &PlanOverrides::default()).unwrap();
        let o = NoisyOracle::exact(p.clone());
        let opts = RunOptions { stop_grad_sq: Some(1e-1), ..RunOptions::new() };
        let rec = run_zo_gd(&o, &space, &plan, &p.x0, 5, &opts).unwrap();
        let hit = rec.hit.expect("run should reach the target");
        assert!(hit < plan.n_steps);
        let ev = evaluate_run(&rec, &p, &space, &EvalOptions { max_mc_points: Some(50), ..EvalOptions::new(2000) }).unwrap();
        assert!(ev.min_grad_f_sq <= 1e-1);
        let l = p.holder.l_nu;
        let fmu = ev.min_grad_fmu_sq.unwrap();
        assert!(ev.min_grad_f_sq <= 2.0 * fmu + 2.0 * plan.mu.powi(2) * l * l * 8.0);
    }

    #[test]
    fn thinned_minimum_dominates_full_minimum() {
        let p = quad8();
        let space = NormSpace::identity(8).unwrap();
        let plan = make_plan(Policy::NU1, &p, 1e-1, &PlanOverrides { n_steps: Some(5000), ..Default::default() }).unwrap();
        let o = NoisyOracle::exact(p.clone());
        let full = run_zo_gd(&o, &space, &plan, &p.x0, 9, &RunOptions { thinning: Thinning::All, ..RunOptions::new() }).unwrap();
        let thin = RunOptions { thinning: Thinning::Every(10), ..RunOptions::new() };
        let part = run_zo_gd(&o, &space, &plan, &p.x0, 9, &thin).unwrap();
        assert_eq!(full.final_x, part.final_x);
        assert!(part.iterates.len() < full.iterates.len());
        let ef = evaluate_run(&full, &p, &space, &EvalOptions::new(0)).unwrap();
        let ep = evaluate_run(&part, &p, &space, &EvalOptions::new(0)).unwrap();
        assert!(ep.min_grad_f_sq >= ef.min_grad_f_sq);
    }

    #[test]
    fn constant_objective_evaluates_to_zero() {
        let p = make_constant(3, 1.5).unwrap();
        let space = NormSpace::identity(3).unwrap();
        let o = NoisyOracle::exact(p.clone());
        let rec = run_zo_gd(&o, &space, &manual(&p, 0.1, 20), &p.x0, 0, &RunOptions::new()).unwrap();
        let ev = evaluate_run(&rec, &p, &space, &EvalOptions::new(100)).unwrap();
        assert_eq!(ev.min_grad_f_sq, 0.0);
        assert_eq!(ev.min_grad_fmu_sq, Some(0.0));
    }

    #[test]
    fn csv_has_one_row_per_step() {
        let p = make_quadratic(2, &[1.0, 2.0]).unwrap();
        let space = NormSpace::identity(2).unwrap();
        let o = NoisyOracle::exact(p.clone());
        let rec = run_zo_gd(&o, &space, &manual(&p, 0.01, 30), &p.x0, 0, &RunOptions::new()).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,f_noisy,g_norm,x0,x1");
        assert_eq!(lines.len(), 31);
    }

    #[test]
    fn point_selection() {
        let g: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
        let c = choose_points(&g, Some(10));
        assert!(c.len() <= 10);
        assert!(c.contains(&0) && c.contains(&99));
        let best = g.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(c.contains(&best));
        assert_eq!(choose_points(&g, None).len(), 100);
    }
}
