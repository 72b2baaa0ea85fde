//! Monte-Carlo witnesses for the smoothing inequalities.
//!
//! Each check estimates the left-hand side of an inequality (and, where it
//! involves `∇f_μ`, part of the right-hand side) by Monte Carlo and compares
//! with the closed form from [`crate::bounds`]. Estimates use common random
//! numbers: the same directions drive the exact and the noisy quantities, so
//! differences carry only their own variance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, APair, Branch, Theorem};
use crate::error::{check_dim, Error, Result};
use crate::noise::{NoiseKind, NoiseModel};
use crate::objective::{HolderClass, Objective};
use crate::oracle::NoisyOracle;
use crate::problems::{random_in_ball, TestProblem};
use crate::sampler::GaussianSampler;
use crate::smoothing::{shifted, ScalarStats, VectorStats};
use crate::space::NormSpace;

pub const DEFAULT_MUS: [f64; 3] = [0.5, 0.1, 0.01];
pub const DEFAULT_DISPLACEMENTS: [f64; 3] = [0.01, 0.1, 1.0];
pub const DEFAULT_NOISE: [NoiseKind; 3] = [NoiseKind::Uniform, NoiseKind::DeterministicSine, NoiseKind::AdversarialSign];
/// A report is inconclusive when its standard error exceeds this share of the bound.
pub const INCONCLUSIVE_SHARE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaLevels {
    /// Multiples of the noise ceiling at each `μ`.
    CeilingFractions(Vec<f64>),
    Absolute(Vec<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySpec {
    pub problem: TestProblem,
    #[serde(skip)]
    pub space: NormSpace,
    pub points: Vec<Vec<f64>>,
    pub mus: Vec<f64>,
    pub deltas: DeltaLevels,
    pub noise_kinds: Vec<NoiseKind>,
    pub displacements: Vec<f64>,
    pub mc_samples: usize,
    /// Independent sampler streams pooled into each estimate.
    pub seeds: usize,
    pub slack: f64,
    pub seed: u64,
    /// Multiplies every right-hand side; `1` except for harness self-tests.
    pub rhs_scale: f64,
}

impl VerifySpec {
    /// `x0` plus 10 random points within radius 5, `μ ∈ {0.5, 0.1, 0.01}`,
    /// `δ ∈ {0, δ_max/2, δ_max}`, 10⁵ samples over 3 streams, 3σ slack.
    pub fn new(problem: TestProblem, seed: u64) -> Result<Self> {
        let n = problem.n();
        let mut spec = Self {
            space: NormSpace::identity(n)?,
            points: Vec::new(),
            problem,
            mus: DEFAULT_MUS.to_vec(),
            deltas: DeltaLevels::CeilingFractions(vec![0.0, 0.5, 1.0]),
            noise_kinds: DEFAULT_NOISE.to_vec(),
            displacements: DEFAULT_DISPLACEMENTS.to_vec(),
            mc_samples: 100_000,
            seeds: 3,
            slack: 3.0,
            seed,
            rhs_scale: 1.0,
        };
        spec.set_random_points(10, 5.0);
        Ok(spec)
    }

    /// `x0` followed by `count` uniform points of the radius-`radius` ball around it.
    pub fn set_random_points(&mut self, count: usize, radius: f64) {
        let x0 = &self.problem.x0;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9017_5eed);
        self.points = vec![x0.clone()];
        self.points.extend((0..count).map(|_| random_in_ball(&mut rng, x0, radius)));
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < 1000 {
            return Err(Error::usage(format!("mc_samples must be >= 1000, got {}", self.mc_samples)));
        }
        if !(self.slack >= 1.0) {
            return Err(Error::usage(format!("slack must be >= 1, got {}", self.slack)));
        }
        if self.seeds == 0 || self.points.is_empty() || self.mus.is_empty() {
            return Err(Error::usage("verification needs seeds, points and mus"));
        }
        if self.mus.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::usage("every mu must be positive"));
        }
        check_dim(self.problem.n(), self.space.dim())?;
        for p in &self.points {
            check_dim(self.problem.n(), p.len())?;
        }
        Ok(())
    }

    /// Noise ceiling used for `CeilingFractions`: T1 when `ν > 0`, else T2.
    pub fn delta_ceiling(&self, mu: f64) -> f64 {
        let nu = self.problem.holder.nu;
        let th = if nu > 0.0 { Theorem::T1 } else { Theorem::T2 };
        bounds::delta_max(th, mu, self.problem.n(), nu)
    }

    pub fn deltas_at(&self, mu: f64) -> Vec<f64> {
        match &self.deltas {
            DeltaLevels::CeilingFractions(f) => f.iter().map(|a| a * self.delta_ceiling(mu)).collect(),
            DeltaLevels::Absolute(d) => d.clone(),
        }
    }

    fn samples_per_stream(&self) -> usize {
        self.mc_samples.div_ceil(self.seeds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// Inequality family, e.g. `gradient_gap`.
    pub check: String,
    /// Which bound inside the family, e.g. `noisy_vs_smooth`.
    pub name: String,
    pub point: Option<usize>,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    pub noise: Option<NoiseKind>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub lhs_std_error: f64,
    pub rhs_std_error: f64,
    pub satisfied: bool,
    pub status: Status,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Ctx {
    point: Option<usize>,
    mu: Option<f64>,
    delta: Option<f64>,
    noise: Option<NoiseKind>,
}

struct Judge {
    slack: f64,
    rhs_scale: f64,
}

impl Judge {
    #[allow(clippy::too_many_arguments)]
    fn report(&self, check: &str, name: &str, ctx: Ctx, lhs: f64, lhs_se: f64, rhs: f64, rhs_se: f64, float_tol: f64) -> BoundReport {
        let rhs = rhs * self.rhs_scale;
        let rhs_se = rhs_se * self.rhs_scale;
        let se = lhs_se.hypot(rhs_se);
        let status = if se > INCONCLUSIVE_SHARE * rhs && se > float_tol {
            Status::Inconclusive
        } else if lhs <= rhs + self.slack * se + float_tol {
            Status::Satisfied
        } else {
            Status::Failed
        };
        BoundReport {
            check: check.into(),
            name: name.into(),
            point: ctx.point,
            mu: ctx.mu,
            delta: ctx.delta,
            noise: ctx.noise,
            lhs,
            rhs,
            margin: rhs - lhs,
            lhs_std_error: lhs_se,
            rhs_std_error: rhs_se,
            satisfied: status == Status::Satisfied,
            status,
            note: None,
        }
    }
}

fn judge(spec: &VerifySpec) -> Judge {
    Judge { slack: spec.slack, rhs_scale: spec.rhs_scale }
}

fn stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &p| (h ^ p).wrapping_mul(0x0100_0000_01b3))
}

fn rounding_tol(scale: f64) -> f64 {
    1e-12 * (1.0 + scale.abs())
}

fn require_gradient(problem: &TestProblem) -> Result<()> {
    if problem.has_gradient() {
        Ok(())
    } else {
        Err(Error::usage("this check needs an analytic gradient"))
    }
}

/// Exact-smoothing statistics at one `(x, μ)`.
struct SmoothStats {
    grad_fmu: VectorStats,
    grad_shift: VectorStats,
    gap: ScalarStats,
    remainder: Vec<ScalarStats>,
}

fn smooth_pass(spec: &VerifySpec, pi: usize, mi: usize, dirs: &[Vec<f64>]) -> SmoothStats {
    let p = &spec.problem;
    let x = &spec.points[pi];
    let mu = spec.mus[mi];
    let n = x.len();
    let mut s = SmoothStats {
        grad_fmu: VectorStats::new(n),
        grad_shift: VectorStats::new(n),
        gap: ScalarStats::new(),
        remainder: vec![ScalarStats::new(); dirs.len()],
    };
    let fx = p.eval(x);
    let mut gx = vec![0.0; n];
    p.grad_into(x, &mut gx);
    let (mut u, mut xp, mut xm, mut g, mut diff, mut yp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let ys: Vec<Vec<f64>> = dirs.iter().map(|d| x.iter().zip(d).map(|(a, b)| a + b).collect()).collect();
    for j in 0..spec.seeds {
        let mut sampler = GaussianSampler::with_stream(spec.space.clone(), spec.seed, stream_id(&[1, pi as u64, mi as u64, j as u64]));
        for _ in 0..spec.samples_per_stream() {
            sampler.fill(&mut u);
            shifted(x, mu, &u, &mut xp);
            shifted(x, -mu, &u, &mut xm);
            let fp = p.eval(&xp);
            p.grad_into(&xp, &mut g);
            s.grad_fmu.push(&g);
            for ((d, a), b) in diff.iter_mut().zip(&g).zip(&gx) {
                *d = a - b;
            }
            s.grad_shift.push(&diff);
            s.gap.push(0.5 * (fp + p.eval(&xm)) - fx);
            for (k, (y, d)) in ys.iter().zip(dirs).enumerate() {
                shifted(y, mu, &u, &mut yp);
                let lin: f64 = g.iter().zip(d).map(|(a, b)| a * b).sum();
                s.remainder[k].push(p.eval(&yp) - fp - lin);
            }
        }
    }
    s
}

/// Noisy-versus-exact statistics at one `(x, μ, δ, noise)`.
struct NoisyStats {
    noise_shift: VectorStats,
    total_shift: VectorStats,
    second_moment: ScalarStats,
}

fn noisy_pass(spec: &VerifySpec, pi: usize, mi: usize, di: usize, kind: NoiseKind, delta: f64) -> Result<NoisyStats> {
    let p = &spec.problem;
    let x = &spec.points[pi];
    let mu = spec.mus[mi];
    let n = x.len();
    let ki = kind as u64;
    let noise = NoiseModel::new(kind, delta, stream_id(&[spec.seed, pi as u64, mi as u64, di as u64, ki]))?;
    let oracle = NoisyOracle::new(p, noise);
    let fx = p.eval(x);
    let mut gx = vec![0.0; n];
    p.grad_into(x, &mut gx);
    let mut s = NoisyStats {
        noise_shift: VectorStats::new(n),
        total_shift: VectorStats::new(n),
        second_moment: ScalarStats::new(),
    };
    let (mut u, mut bu, mut xp, mut g, mut a, mut b) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for j in 0..spec.seeds {
        let id = stream_id(&[2, pi as u64, mi as u64, di as u64, ki, j as u64]);
        let mut sampler = GaussianSampler::with_stream(spec.space.clone(), spec.seed, id);
        for _ in 0..spec.samples_per_stream() {
            sampler.fill(&mut u);
            shifted(x, mu, &u, &mut xp);
            let fp = p.eval(&xp);
            let c = (fp - fx) / mu;
            let c_noisy = (oracle.query(&xp)? - oracle.query(x)?) / mu;
            spec.space.apply_b_into(&u, &mut bu);
            p.grad_into(&xp, &mut g);
            let dc = c_noisy - c;
            for i in 0..n {
                a[i] = dc * bu[i];
                b[i] = a[i] + g[i] - gx[i];
            }
            s.noise_shift.push(&a);
            s.total_shift.push(&b);
            s.second_moment.push(c_noisy * c_noisy * spec.space.primal_sq(&u));
        }
    }
    Ok(s)
}

fn vector_lhs(stats: &VectorStats, space: &NormSpace) -> (f64, f64) {
    let est = stats.finish();
    (space.dual_sq(&est.mean).sqrt(), est.std_error_norm(space))
}

/// `‖∇f_μ(x)‖*²` (unbiased) and its standard error.
fn grad_fmu_sq(stats: &VectorStats, space: &NormSpace) -> (f64, f64) {
    let est = stats.finish();
    let sq = est.mean_dual_sq_unbiased(space);
    (sq, 2.0 * space.dual_sq(&est.mean).sqrt() * est.std_error_norm(space))
}

fn displacement_dirs(spec: &VerifySpec, pi: usize) -> Vec<Vec<f64>> {
    let n = spec.problem.n();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_id(&[spec.seed, 3, pi as u64]));
    spec.displacements
        .iter()
        .map(|&r| {
            let v = random_in_ball(&mut rng, &vec![0.0; n], 1.0);
            let norm = spec.space.primal_sq(&v).sqrt().max(f64::MIN_POSITIVE);
            v.iter().map(|c| c * r / norm).collect()
        })
        .collect()
}

fn tasks(spec: &VerifySpec) -> Vec<(usize, usize)> {
    (0..spec.points.len()).flat_map(|p| (0..spec.mus.len()).map(move |m| (p, m))).collect()
}

fn gradient_gap_reports(spec: &VerifySpec, pi: usize, mi: usize, smooth: &SmoothStats) -> Result<Vec<BoundReport>> {
    let j = judge(spec);
    let h = spec.problem.holder;
    let n = spec.problem.n();
    let mu = spec.mus[mi];
    let mut out = Vec::new();
    for (di, delta) in spec.deltas_at(mu).into_iter().enumerate() {
        for &kind in &spec.noise_kinds {
            let ctx = Ctx { point: Some(pi), mu: Some(mu), delta: Some(delta), noise: Some(kind) };
            let (b1, b2, b3) = bounds::grad_gap_bounds(h, mu, delta, n);
            let noisy = noisy_pass(spec, pi, mi, di, kind, delta)?;
            let (l1, s1) = vector_lhs(&noisy.noise_shift, &spec.space);
            out.push(j.report("gradient_gap", "noisy_vs_smooth", ctx, l1, s1, b1, 0.0, 0.0));
            let (l2, s2) = vector_lhs(&smooth.grad_shift, &spec.space);
            out.push(j.report("gradient_gap", "smooth_vs_true", ctx, l2, s2, b2, 0.0, 0.0));
            let (l3, s3) = vector_lhs(&noisy.total_shift, &spec.space);
            out.push(j.report("gradient_gap", "noisy_vs_true", ctx, l3, s3, b3, 0.0, 0.0));
        }
    }
    Ok(out)
}

fn a_pairs(h: HolderClass, mu: f64, n: usize) -> Result<Vec<(String, APair)>> {
    Ok(vec![
        ("smooth".into(), bounds::a_pair(Branch::Smooth, h, mu, n, None)?),
        ("direct(delta_hat=1)".into(), bounds::a_pair(Branch::Direct, h, mu, n, Some(1.0))?),
        (
            "direct(delta_hat=(n+6)^((1+nu)/2))".into(),
            bounds::a_pair(Branch::Direct, h, mu, n, Some(bounds::theorem_delta_hat(n, h.nu)))?,
        ),
    ])
}

fn descent_reports(spec: &VerifySpec, pi: usize, mi: usize, smooth: &SmoothStats) -> Result<Vec<BoundReport>> {
    let j = judge(spec);
    let h = spec.problem.holder;
    let n = spec.problem.n();
    let mu = spec.mus[mi];
    let pairs = a_pairs(h, mu, n)?;
    let scale = spec.problem.eval(&spec.points[pi]);
    let mut out = Vec::new();
    for (k, &r) in spec.displacements.iter().enumerate() {
        let est = smooth.remainder[k].finish();
        let ctx = Ctx { point: Some(pi), mu: Some(mu), delta: None, noise: None };
        for (label, ap) in &pairs {
            let rhs = ap.a1 / 2.0 * r * r + ap.a2;
            let mut rep = j.report("descent_inequality", label, ctx, est.mean.abs(), est.std_error, rhs, 0.0, rounding_tol(scale));
            rep.note = Some(format!("|y - x| = {r}"));
            out.push(rep);
        }
    }
    Ok(out)
}

fn function_gap_report(spec: &VerifySpec, pi: usize, mi: usize, smooth: &SmoothStats) -> BoundReport {
    let mu = spec.mus[mi];
    let est = smooth.gap.finish();
    let rhs = bounds::func_gap_bound(spec.problem.holder, mu, spec.problem.n());
    let scale = spec.problem.eval(&spec.points[pi]);
    let ctx = Ctx { point: Some(pi), mu: Some(mu), delta: None, noise: None };
    judge(spec).report("function_gap", "smoothed_vs_true", ctx, est.mean.abs(), est.std_error, rhs, 0.0, rounding_tol(scale))
}

fn transfer_report(spec: &VerifySpec, pi: usize, mi: usize, smooth: &SmoothStats) -> BoundReport {
    let p = &spec.problem;
    let mu = spec.mus[mi];
    let n = p.n();
    let x = &spec.points[pi];
    let lhs = spec.space.dual_sq(&p.grad(x).unwrap_or_else(|| vec![0.0; n]));
    let (g2, g2_se) = grad_fmu_sq(&smooth.grad_fmu, &spec.space);
    let narrow = bounds::grad_transfer_bound(p.holder, mu, n, g2);
    let wide = bounds::grad_transfer_bound_wide(p.holder, mu, n, g2).max(narrow);
    let ctx = Ctx { point: Some(pi), mu: Some(mu), delta: None, noise: None };
    let mut rep = judge(spec).report("gradient_transfer", "n^(2nu) constant", ctx, lhs, 0.0, wide, 2.0 * g2_se, rounding_tol(lhs));
    let held = lhs <= narrow * spec.rhs_scale + spec.slack * 2.0 * g2_se;
    rep.note = Some(format!("n^nu constant {}: rhs {narrow:.6e}", if held { "also held" } else { "was not enough" }));
    rep
}

fn second_moment_reports(spec: &VerifySpec, pi: usize, mi: usize, smooth: &SmoothStats) -> Result<Vec<BoundReport>> {
    let j = judge(spec);
    let p = &spec.problem;
    let h = p.holder;
    let n = p.n();
    let mu = spec.mus[mi];
    let (g2, g2_se) = grad_fmu_sq(&smooth.grad_fmu, &spec.space);
    let pairs = a_pairs(h, mu, n)?;
    let mut out = Vec::new();
    for (di, delta) in spec.deltas_at(mu).into_iter().enumerate() {
        for &kind in &spec.noise_kinds {
            let noisy = noisy_pass(spec, pi, mi, di, kind, delta)?;
            let est = noisy.second_moment.finish();
            let ctx = Ctx { point: Some(pi), mu: Some(mu), delta: Some(delta), noise: Some(kind) };
            for (label, ap) in pairs.iter().filter(|(l, _)| !l.contains("delta_hat=1)")) {
                let rhs = bounds::second_moment_bound(h, mu, delta, n, ap, g2);
                let rhs_se = 20.0 * (n as f64 + 4.0) * g2_se;
                out.push(j.report("second_moment", label, ctx, est.mean, est.std_error, rhs, rhs_se, 0.0));
            }
        }
    }
    Ok(out)
}

fn run_per_point<F>(spec: &VerifySpec, f: F) -> Result<Vec<BoundReport>>
where
    F: Fn(usize, usize, &SmoothStats) -> Result<Vec<BoundReport>> + Sync,
{
    spec.validate()?;
    require_gradient(&spec.problem)?;
    let parts: Vec<Result<Vec<BoundReport>>> = tasks(spec)
        .par_iter()
        .map(|&(pi, mi)| {
            let dirs = displacement_dirs(spec, pi);
            let smooth = smooth_pass(spec, pi, mi, &dirs);
            f(pi, mi, &smooth)
        })
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `‖∇f̃_μ − ∇f_μ‖* ≤ δ√n/μ`, `‖∇f_μ − ∇f‖* ≤ μ^ν L n^{ν/2}` and their sum.
pub fn check_gradient_gaps(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    run_per_point(spec, |pi, mi, s| gradient_gap_reports(spec, pi, mi, s))
}

/// `|f_μ(y) − f_μ(x) − ⟨∇f_μ(x), y−x⟩| ≤ A₁/2‖y−x‖² + A₂` for every A-pair.
pub fn check_descent_inequality(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    run_per_point(spec, |pi, mi, s| descent_reports(spec, pi, mi, s))
}

/// `|f_μ(x) − f(x)| ≤ L/(1+ν) μ^{1+ν} n^{(1+ν)/2}`.
pub fn check_function_gap(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    run_per_point(spec, |pi, mi, s| Ok(vec![function_gap_report(spec, pi, mi, s)]))
}

/// `‖∇f‖*² ≤ 2‖∇f_μ‖*² + 2μ^{2ν}L²n^{ν}`, judged with the larger `n^{2ν}`.
pub fn check_gradient_transfer(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    run_per_point(spec, |pi, mi, s| Ok(vec![transfer_report(spec, pi, mi, s)]))
}

/// `E‖g_μ(x, u, δ)‖*²` against its closed-form majorant.
pub fn check_second_moment(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    run_per_point(spec, |pi, mi, s| second_moment_reports(spec, pi, mi, s))
}

/// Every problem-dependent check, sharing one exact-smoothing pass per `(x, μ)`.
pub fn check_all(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    let mut out = run_per_point(spec, |pi, mi, s| {
        let mut r = gradient_gap_reports(spec, pi, mi, s)?;
        r.extend(descent_reports(spec, pi, mi, s)?);
        r.push(function_gap_report(spec, pi, mi, s));
        r.push(transfer_report(spec, pi, mi, s));
        r.extend(second_moment_reports(spec, pi, mi, s)?);
        Ok(r)
    })?;
    out.sort_by(|a, b| a.check.cmp(&b.check));
    Ok(out)
}

pub const MOMENT_POWERS: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];
pub const MOMENT_DIMS: [usize; 3] = [2, 8, 32];

/// Gaussian moment bounds, the `(n+4)‖g‖*²` bound and the quadratic majorant
/// of `L t^{1+ν}/(1+ν)`.
pub fn check_appendix(spec: &VerifySpec) -> Result<Vec<BoundReport>> {
    if spec.mc_samples < 1000 {
        return Err(Error::usage(format!("mc_samples must be >= 1000, got {}", spec.mc_samples)));
    }
    let j = judge(spec);
    let mut out: Vec<BoundReport> = MOMENT_DIMS
        .par_iter()
        .map(|&n| appendix_for_dim(spec, &j, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for k in 1..=9 {
        let nu = k as f64 / 10.0;
        let h = HolderClass::new(nu, 1.0)?;
        for dt in [0.01, 0.1, 1.0] {
            let mut worst = f64::NEG_INFINITY;
            let mut at = (0.0, 0.0, 0.0);
            for i in 0..=1000 {
                let t = 10.0 * i as f64 / 1000.0;
                let lhs = t.powf(1.0 + nu) / (1.0 + nu);
                let rhs = bounds::holder_to_lipschitz(h, t, dt);
                if lhs - rhs > worst {
                    worst = lhs - rhs;
                    at = (t, lhs, rhs);
                }
            }
            let mut rep = j.report("lipschitz_majorant", &format!("nu={nu},delta_tilde={dt}"), Ctx::default(), at.1, 0.0, at.2, 0.0, rounding_tol(at.2));
            rep.note = Some(format!("tightest grid point t = {}", at.0));
            out.push(rep);
        }
    }
    Ok(out)
}

fn appendix_for_dim(spec: &VerifySpec, j: &Judge, n: usize) -> Result<Vec<BoundReport>> {
    let space = NormSpace::identity(n)?;
    let mut sampler = GaussianSampler::with_stream(space, spec.seed, stream_id(&[4, n as u64]));
    let mut rng = ChaCha8Rng::seed_from_u64(stream_id(&[spec.seed, 5, n as u64]));
    let g = random_in_ball(&mut rng, &vec![0.0; n], 1.0);
    let g2: f64 = g.iter().map(|v| v * v).sum();
    let mut moments = vec![ScalarStats::new(); MOMENT_POWERS.len()];
    let mut quartic = ScalarStats::new();
    let mut u = vec![0.0; n];
    for _ in 0..spec.mc_samples {
        sampler.fill(&mut u);
        let r2: f64 = u.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        for (s, &p) in moments.iter_mut().zip(&MOMENT_POWERS) {
            s.push(r.powf(p));
        }
        let gu: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
        quartic.push(gu * gu * r2);
    }
    let ctx = Ctx::default();
    let mut out = Vec::new();
    for (s, &p) in moments.iter().zip(&MOMENT_POWERS) {
        let est = s.finish();
        let mut rep = j.report("gaussian_moment", &format!("n={n},p={p}"), ctx, est.mean, est.std_error, bounds::moment_bound(n, p), 0.0, 0.0);
        rep.note = Some(format!("E|u|^{p} over {} samples", est.samples));
        out.push(rep);
    }
    let est = quartic.finish();
    let mut rep = j.report("gaussian_moment", &format!("n={n},<g,u>^2|u|^2"), ctx, est.mean, est.std_error, (n as f64 + 4.0) * g2, 0.0, 0.0);
    rep.note = Some(format!("identity value (n+2)|g|^2 = {}", (n as f64 + 2.0) * g2));
    out.push(rep);
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub satisfied: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

pub fn tally(reports: &[BoundReport]) -> Tally {
    let mut t = Tally::default();
    for r in reports {
        match r.status {
            Status::Satisfied => t.satisfied += 1,
            Status::Failed => t.failed += 1,
            Status::Inconclusive => t.inconclusive += 1,
        }
    }
    t
}
