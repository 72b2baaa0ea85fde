use serde_json::{json, Value};

use zoh_core::solver::Plan;

use crate::config::{plan_for, ExperimentConfig};
use crate::output::{sci, write_json};
use crate::{CliError, Outcome, SCHEMA_VERSION};

pub fn plan_json(cfg: &ExperimentConfig, plan: &Plan) -> Value {
    let row = plan.policy.theorem().map(|t| {
        let (possible_nu, n_order, delta_order) = t.table_row();
        json!({"theorem": t.as_str(), "possible_nu": possible_nu, "n_order": n_order, "delta_order": delta_order})
    });
    json!({
        "schema_version": SCHEMA_VERSION,
        "problem": cfg.problem,
        "plan": plan,
        "table_row": row,
    })
}

pub fn describe(plan: &Plan) -> String {
    let mut s = format!(
        "policy {}  n = {}  nu = {}  L = {}  eps = {}\n",
        plan.policy,
        plan.n,
        plan.holder.nu,
        sci(plan.holder.l_nu),
        sci(plan.eps_grad)
    );
    s += &format!("  mu        {}\n  D         {}\n  h         {}\n", sci(plan.mu), sci(plan.d), sci(plan.h));
    s += &format!("  N         {}\n  delta_max {}\n", plan.n_steps, sci(plan.delta_max));
    s += &format!("  A1 = {}  A2 = {}  ({:?})\n", sci(plan.apair.a1), sci(plan.apair.a2), plan.apair.branch);
    if let Some(t) = plan.policy.theorem() {
        let (nu, n_order, d_order) = t.table_row();
        s += &format!("  rate row  {t}: {nu}; N ~ {n_order}; delta ~ {d_order}\n");
    }
    s
}

pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let problem = cfg.build_problem()?;
    let plan = plan_for(cfg, &problem, cfg.eps_grad)?;
    let v = plan_json(cfg, &plan);
    write_json(&cfg.out.join("plan.json"), &v)?;
    say!("{}", describe(&plan).trim_end());
    say!("{}", serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(Outcome::ok(v))
}
