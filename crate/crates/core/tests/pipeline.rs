use zoh_core::problems::make_nonconvex_trig;
use zoh_core::solver::{evaluate_run, make_plan, run_zo_gd, EvalOptions, PlanOverrides, Policy, RunOptions};
use zoh_core::{build_problem, NoiseModel, NoisyOracle, NormSpace, Objective};

#[test]
fn plan_run_evaluate_on_quadratic() {
    let p = build_problem("quadratic:n=4:spectrum=geom(1,4)").unwrap();
    let plan = make_plan(Policy::NU1, &p, 5e-2, &PlanOverrides::default()).unwrap();
    let space = NormSpace::identity(4).unwrap();
    let noise = NoiseModel::new(zoh_core::NoiseKind::Uniform, plan.delta_max, 1).unwrap();
    let oracle = NoisyOracle::new(&p, noise);
    let opts = RunOptions { stop_grad_sq: Some(5e-2), ..RunOptions::new() };
    let rec = run_zo_gd(&oracle, &space, &plan, &p.x0, 4, &opts).unwrap();
    assert!(rec.hit.is_some() && !rec.flagged);
    assert_eq!(rec.oracle_calls, 2 * rec.steps_taken);
    let ev = evaluate_run(&rec, &p, &space, &EvalOptions::new(500)).unwrap();
    assert!(ev.min_grad_f_sq <= 5e-2);
    assert!(ev.min_grad_fmu_sq.unwrap() <= 5e-2 + 10.0 * ev.min_grad_fmu_sq_std_error.unwrap());
}

#[test]
fn nonconvex_descent_reduces_gradient() {
    let p = make_nonconvex_trig(4, 0.5).unwrap();
    let plan = make_plan(Policy::T1, &p, 0.5, &PlanOverrides::default()).unwrap();
    let space = NormSpace::identity(4).unwrap();
    let opts = RunOptions { max_steps: Some(200_000), record_steps: false, ..RunOptions::new() };
    let rec = run_zo_gd(&NoisyOracle::exact(&p), &space, &plan, &p.x0, 8, &opts).unwrap();
    let g0: f64 = p.grad(&p.x0).unwrap().iter().map(|v| v * v).sum();
    let ev = evaluate_run(&rec, &p, &space, &EvalOptions::new(0)).unwrap();
    assert!(ev.min_grad_f_sq < 0.5 * g0, "{} vs {g0}", ev.min_grad_f_sq);
    assert!(rec.diverged.is_none());
}
