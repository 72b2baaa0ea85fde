use std::collections::BTreeMap;

use serde_json::json;

use zoh_core::verify::{check_all, check_appendix, tally, BoundReport, Status};

use crate::config::ExperimentConfig;
use crate::output::{sci, write_json};
use crate::{CliError, Outcome, EXIT_VERIFY, SCHEMA_VERSION};

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let problem = cfg.build_problem()?;
    let spec = cfg.verify_spec(problem, cfg.seeds[0])?;
    let mut reports = check_all(&spec)?;
    if cfg.verify.appendix {
        reports.extend(check_appendix(&spec)?);
    }
    let t = tally(&reports);
    print_table(&reports);
    if t.inconclusive > 0 {
        log::warn!("{} inconclusive reports", t.inconclusive);
        say!("warning: {} reports inconclusive (standard error above 10% of the bound)", t.inconclusive);
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "problem": cfg.problem,
        "seed": cfg.seeds[0],
        "mc_samples": spec.mc_samples,
        "slack": spec.slack,
        "rhs_scale": spec.rhs_scale,
        "tally": t,
        "reports": reports,
    });
    write_json(&cfg.out.join("verify.json"), &summary)?;
    let mut out = Outcome::ok(summary);
    if t.failed > 0 {
        out.exit_code = EXIT_VERIFY;
    }
    Ok(out)
}

fn print_table(reports: &[BoundReport]) {
    #[derive(Default)]
    struct Row {
        ok: usize,
        failed: usize,
        inconclusive: usize,
        worst: f64,
    }
    let mut rows: BTreeMap<(String, String), Row> = BTreeMap::new();
    for r in reports {
        let row = rows.entry((r.check.clone(), r.name.clone())).or_default();
        match r.status {
            Status::Satisfied => row.ok += 1,
            Status::Failed => row.failed += 1,
            Status::Inconclusive => row.inconclusive += 1,
        }
        if r.rhs > 0.0 {
            row.worst = row.worst.max(r.lhs / r.rhs);
        }
    }
    say!("{:<20} {:<36} {:>6} {:>6} {:>6} {:>12}", "check", "bound", "ok", "fail", "inc", "max lhs/rhs");
    for ((check, name), r) in &rows {
        say!("{check:<20} {name:<36} {:>6} {:>6} {:>6} {:>12}", r.ok, r.failed, r.inconclusive, sci(r.worst));
    }
}
