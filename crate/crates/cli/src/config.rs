//! Experiment manifests: one JSON document, optionally patched by
//! `--override key=value` pairs before it is parsed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use zoh_core::solver::{Plan, PlanOverrides, Policy, RunOptions, Thinning};
use zoh_core::verify::{DeltaLevels, VerifySpec, DEFAULT_DISPLACEMENTS, DEFAULT_MUS, DEFAULT_NOISE};
use zoh_core::{build_problem, NoiseKind, NoiseModel, ProblemSpec, TestProblem};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_noise_kind")]
    pub kind: NoiseKind,
    /// Absolute level; exclusive with `delta_fraction`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Level as a multiple of the plan's `δ_max`.
    #[serde(default)]
    pub delta_fraction: Option<f64>,
    /// Lattice spacing for adversarial signs.
    #[serde(default)]
    pub cell: Option<f64>,
}

fn default_noise_kind() -> NoiseKind {
    NoiseKind::None
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { kind: NoiseKind::None, delta: None, delta_fraction: None, cell: None }
    }
}

impl NoiseConfig {
    pub fn level(&self, delta_max: f64) -> Result<f64, CliError> {
        match (self.delta, self.delta_fraction) {
            (Some(_), Some(_)) => Err(CliError::usage("noise.delta and noise.delta_fraction are exclusive")),
            (Some(d), None) => Ok(d),
            (None, Some(a)) => Ok(a * delta_max),
            (None, None) => Ok(0.0),
        }
    }

    pub fn model(&self, delta_max: f64, seed: u64) -> Result<NoiseModel, CliError> {
        let delta = self.level(delta_max)?;
        let kind = if delta == 0.0 { NoiseKind::None } else { self.kind };
        let mut m = NoiseModel::new(kind, delta, seed)?;
        if let Some(c) = self.cell {
            m = m.with_cell(c)?;
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Stop each run once `‖∇f(x_k)‖*² ≤ eps_grad`.
    pub stop_at_target: bool,
    /// Run only a prefix of the planned steps.
    pub max_steps: Option<u64>,
    pub thinning: Thinning,
    pub cache_base: bool,
    /// Skip per-seed trace CSVs.
    pub no_traces: bool,
    /// Estimate `|f_μ − f|` at the final iterate.
    pub final_gap: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub eps: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    /// Runs may continue to this multiple of the planned `N` (default 1), so
    /// a first hit past the plan is seen rather than censored.
    pub horizon_factor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub mus: Vec<f64>,
    /// Multiples of `δ_max(μ)`; ignored when `deltas` is set.
    pub delta_fractions: Vec<f64>,
    pub deltas: Option<Vec<f64>>,
    pub noise_kinds: Vec<NoiseKind>,
    pub displacements: Vec<f64>,
    pub mc_samples: usize,
    /// Sampler streams pooled into each estimate.
    pub streams: usize,
    pub slack: f64,
    /// Random points added around `x0`.
    pub random_points: usize,
    pub radius: f64,
    pub appendix: bool,
    /// Debug only: multiplies every bound, e.g. `0.5` to force failures.
    pub rhs_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            mus: DEFAULT_MUS.to_vec(),
            delta_fractions: vec![0.0, 0.5, 1.0],
            deltas: None,
            noise_kinds: DEFAULT_NOISE.to_vec(),
            displacements: DEFAULT_DISPLACEMENTS.to_vec(),
            mc_samples: 100_000,
            streams: 3,
            slack: 3.0,
            random_points: 10,
            radius: 5.0,
            appendix: true,
            rhs_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    pub policy: Policy,
    pub eps_grad: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Samples per Monte-Carlo estimate of `∇f_μ` when evaluating runs.
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    #[serde(default = "default_mc_points")]
    pub max_mc_points: Option<usize>,
    #[serde(default)]
    pub plan: PlanOverrides,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_mc() -> usize {
    2000
}

fn default_mc_points() -> Option<usize> {
    Some(40)
}

impl ExperimentConfig {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_value(v).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?;
        let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("parsing {}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        Self::from_value(v)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::usage("seeds must be non-empty"));
        }
        if !(self.eps_grad > 0.0) {
            return Err(CliError::usage(format!("eps_grad must be positive, got {}", self.eps_grad)));
        }
        build_problem(&self.problem)?;
        self.noise.level(1.0)?;
        Ok(())
    }

    pub fn build_problem(&self) -> Result<TestProblem, CliError> {
        Ok(build_problem(&self.problem)?)
    }

    /// The problem with its dimension replaced, for `n` sweeps.
    pub fn problem_with_n(&self, n: usize) -> Result<TestProblem, CliError> {
        let spec: ProblemSpec = self.problem.parse()?;
        Ok(spec.with_param("n", n).build()?)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            thinning: self.run.thinning,
            stop_grad_sq: self.run.stop_at_target.then_some(self.eps_grad),
            cache_base: self.run.cache_base,
            record_steps: !self.run.no_traces,
            max_steps: self.run.max_steps,
        }
    }

    pub fn verify_spec(&self, problem: TestProblem, seed: u64) -> Result<VerifySpec, CliError> {
        let v = &self.verify;
        let mut spec = VerifySpec::new(problem, seed)?;
        spec.set_random_points(v.random_points, v.radius);
        spec.mus = v.mus.clone();
        spec.deltas = match &v.deltas {
            Some(d) => DeltaLevels::Absolute(d.clone()),
            None => DeltaLevels::CeilingFractions(v.delta_fractions.clone()),
        };
        spec.noise_kinds = v.noise_kinds.clone();
        spec.displacements = v.displacements.clone();
        spec.mc_samples = v.mc_samples;
        spec.seeds = v.streams;
        spec.slack = v.slack;
        spec.rhs_scale = v.rhs_scale;
        spec.validate()?;
        Ok(spec)
    }
}

/// `a.b.c=value`; the value is read as JSON and falls back to a string.
pub fn apply_override(root: &mut Value, kv: &str) -> Result<(), CliError> {
    let (key, raw) = kv.split_once('=').ok_or_else(|| CliError::usage(format!("override {kv:?} is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::usage(format!("override {key:?}: {part:?} is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(CliError::usage(format!("empty override key in {kv:?}")))
}

/// Plan of a config applied to a problem.
pub fn plan_for(cfg: &ExperimentConfig, problem: &TestProblem, eps: f64) -> Result<Plan, CliError> {
    Ok(zoh_core::solver::make_plan(cfg.policy, problem, eps, &cfg.plan)?)
}
