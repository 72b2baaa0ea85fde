//! Test objectives with certified Hölder classes, plus a small string registry
//! (`"quadratic:n=8:spectrum=geom(1,10)"`) used by configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{HolderClass, Objective};

/// Safety factor applied to numerically certified Hölder constants.
pub const HOLDER_SAFETY: f64 = 1.05;
const CERT_GRID: usize = 2000;
const CERT_HALF_WIDTH: f64 = 10.0;
const CERT_PAIRS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemKind {
    /// `½⟨Qx, x⟩` with `Q = diag(spectrum)`.
    Quadratic { spectrum: Vec<f64> },
    /// `1/(1+ν) Σᵢ |xᵢ − cᵢ|^{1+ν}`.
    HolderPower { nu: f64, center: Vec<f64> },
    /// `Σᵢ ½xᵢ² + a·sin(xᵢ)`.
    NonconvexTrig { n: usize, a: f64 },
    /// `⟨c, x⟩ + b`.
    Linear { c: Vec<f64>, offset: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TestProblem {
    pub name: String,
    pub kind: ProblemKind,
    pub holder: HolderClass,
    pub x0: Vec<f64>,
    pub f_star_lower: f64,
}

impl TestProblem {
    pub fn n(&self) -> usize {
        self.x0.len()
    }
}

impl Objective for TestProblem {
    fn dim(&self) -> usize {
        self.x0.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ProblemKind::Quadratic { spectrum } => {
                0.5 * spectrum.iter().zip(x).map(|(q, v)| q * v * v).sum::<f64>()
            }
            ProblemKind::HolderPower { nu, center } => {
                let p = 1.0 + nu;
                let s: f64 = if *nu == 1.0 {
                    x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum()
                } else {
                    x.iter().zip(center).map(|(v, c)| (v - c).abs().powf(p)).sum()
                };
                s / p
            }
            ProblemKind::NonconvexTrig { a, .. } => x.iter().map(|v| 0.5 * v * v + a * v.sin()).sum(),
            ProblemKind::Linear { c, offset } => c.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + offset,
        }
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> bool {
        match &self.kind {
            ProblemKind::Quadratic { spectrum } => {
                for ((o, q), v) in out.iter_mut().zip(spectrum).zip(x) {
                    *o = q * v;
                }
            }
            ProblemKind::HolderPower { nu, center } => {
                for ((o, v), c) in out.iter_mut().zip(x).zip(center) {
                    *o = holder_power_derivative(v - c, *nu);
                }
            }
            ProblemKind::NonconvexTrig { a, .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v + a * v.cos();
                }
            }
            ProblemKind::Linear { c, .. } => out.copy_from_slice(c),
        }
        true
    }

    fn holder(&self) -> HolderClass {
        self.holder
    }

    fn f_star_lower(&self) -> f64 {
        self.f_star_lower
    }
}

/// `φ'(t) = sign(t)|t|^ν`, with `φ'(0) = 0`.
fn holder_power_derivative(t: f64, nu: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if nu == 1.0 {
        t
    } else {
        t.signum() * t.abs().powf(nu)
    }
}

/// `f(x) = ½⟨Qx, x⟩`, `Q = diag(spectrum)`; `L₁ = max(spectrum)`.
///
/// The start point puts equal energy `1/n` in every eigen-direction, so
/// `f(x0) = 1` independently of `n` and the spectrum.
pub fn make_quadratic(n: usize, spectrum: &[f64]) -> Result<TestProblem> {
    if n == 0 || spectrum.len() != n {
        return Err(Error::usage(format!(
            "quadratic: spectrum has {} entries, expected n = {n}",
            spectrum.len()
        )));
    }
    if let Some(bad) = spectrum.iter().find(|&&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::usage(format!("quadratic: spectrum entries must be positive, got {bad}")));
    }
    let l = spectrum.iter().cloned().fold(0.0, f64::max);
    let x0 = spectrum.iter().map(|q| (2.0 / (n as f64 * q)).sqrt()).collect();
    Ok(TestProblem {
        name: format!("quadratic(n={n})"),
        kind: ProblemKind::Quadratic { spectrum: spectrum.to_vec() },
        holder: HolderClass::new(1.0, l)?,
        x0,
        f_star_lower: 0.0,
    })
}

/// `f(x) = 1/(1+ν) Σᵢ |xᵢ − cᵢ|^{1+ν}` with a numerically certified `L_ν`.
pub fn make_holder_power(n: usize, nu: f64, center: &[f64]) -> Result<TestProblem> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::usage(format!("holder_power: nu must lie in (0, 1], got {nu}")));
    }
    if n == 0 || center.len() != n {
        return Err(Error::usage(format!("holder_power: center has {} entries, expected {n}", center.len())));
    }
    let l = certify_holder_power_constant(n, nu);
    let offset = 0.5 / (n as f64).sqrt();
    let problem = TestProblem {
        name: format!("holder_power(n={n},nu={nu})"),
        kind: ProblemKind::HolderPower { nu, center: center.to_vec() },
        holder: HolderClass::new(nu, l)?,
        x0: center.iter().map(|c| c + offset).collect(),
        f_star_lower: 0.0,
    };
    let check = holder_check(&problem, &problem.x0, CERT_HALF_WIDTH, CERT_PAIRS, 0x401d)?;
    if check.violations > 0 {
        return Err(Error::usage(format!(
            "holder_power: certified constant {l} violated (max quotient {})",
            check.max_quotient
        )));
    }
    Ok(problem)
}

/// Hölder constant of `x ↦ (sign(xᵢ−cᵢ)|xᵢ−cᵢ|^ν)ᵢ` in the Euclidean norm:
/// the safety factor times the 1-D grid maximum, times `n^{(1−ν)/2}` because
/// coordinates combine through `Σ|dᵢ|^{2ν} ≤ n^{1−ν} (Σdᵢ²)^ν`.
pub fn certify_holder_power_constant(n: usize, nu: f64) -> f64 {
    HOLDER_SAFETY * holder_quotient_grid_max(nu) * (n as f64).powf((1.0 - nu) / 2.0)
}

/// Maximum of `|φ'(t) − φ'(s)| / |t − s|^ν` over a 2000×2000 grid on `[−10, 10]²`.
pub fn holder_quotient_grid_max(nu: f64) -> f64 {
    let grid: Vec<f64> = (0..CERT_GRID)
        .map(|i| -CERT_HALF_WIDTH + 2.0 * CERT_HALF_WIDTH * i as f64 / (CERT_GRID - 1) as f64)
        .collect();
    let derivs: Vec<f64> = grid.iter().map(|&t| holder_power_derivative(t, nu)).collect();
    let mut best = 0.0f64;
    for i in 0..CERT_GRID {
        for j in 0..i {
            let q = (derivs[i] - derivs[j]).abs() / (grid[i] - grid[j]).abs().powf(nu);
            best = best.max(q);
        }
    }
    best
}

/// `f(x) = Σᵢ ½xᵢ² + a·sin(xᵢ)`: coercive, non-convex, `L₁ = 1 + a`.
pub fn make_nonconvex_trig(n: usize, a: f64) -> Result<TestProblem> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::usage(format!("trig: a must lie in (0, 1), got {a}")));
    }
    if n == 0 {
        return Err(Error::usage("trig: dimension must be positive"));
    }
    Ok(TestProblem {
        name: format!("trig(n={n},a={a})"),
        kind: ProblemKind::NonconvexTrig { n, a },
        holder: HolderClass::new(1.0, 1.0 + a)?,
        x0: vec![2.0; n],
        f_star_lower: -(n as f64) * a,
    })
}

/// `f(x) = ⟨c, x⟩ + b`; unbounded below, gradient constant.
pub fn make_linear(c: &[f64], offset: f64) -> Result<TestProblem> {
    if c.is_empty() {
        return Err(Error::usage("linear: dimension must be positive"));
    }
    Ok(TestProblem {
        name: format!("linear(n={})", c.len()),
        kind: ProblemKind::Linear { c: c.to_vec(), offset },
        holder: HolderClass::new(1.0, 0.0)?,
        x0: vec![0.0; c.len()],
        f_star_lower: f64::NEG_INFINITY,
    })
}

/// The constant function `b` (a linear problem with `c = 0`).
pub fn make_constant(n: usize, value: f64) -> Result<TestProblem> {
    let mut p = make_linear(&vec![0.0; n], value)?;
    p.name = format!("constant(n={n})");
    p.f_star_lower = value;
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCheck {
    pub pairs: usize,
    pub violations: usize,
    /// Largest observed `‖∇f(y) − ∇f(x)‖* / ‖y − x‖^ν`.
    pub max_quotient: f64,
}

/// Samples random pairs in the Euclidean ball of `radius` around `center` and
/// counts violations of the declared Hölder inequality.
pub fn holder_check<O: Objective + ?Sized>(
    obj: &O,
    center: &[f64],
    radius: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderCheck> {
    let n = obj.dim();
    let h = obj.holder();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gx, mut gy) = (vec![0.0; n], vec![0.0; n]);
    let mut violations = 0;
    let mut max_quotient = 0.0f64;
    for _ in 0..pairs {
        let x = random_in_ball(&mut rng, center, radius);
        let y = random_in_ball(&mut rng, center, radius);
        if !obj.grad_into(&x, &mut gx) || !obj.grad_into(&y, &mut gy) {
            return Err(Error::usage("Hölder check requires an analytic gradient"));
        }
        let dg = gx.iter().zip(&gy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dx = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dx == 0.0 {
            continue;
        }
        let q = dg / dx.powf(h.nu);
        max_quotient = max_quotient.max(q);
        if dg > h.l_nu * dx.powf(h.nu) * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(HolderCheck { pairs, violations, max_quotient })
}

/// Uniform point in the Euclidean ball.
pub fn random_in_ball(rng: &mut impl Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    center.iter().zip(&dir).map(|(c, d)| c + r * d / norm).collect()
}

/// Parsed problem spec: `family:key=value:key=value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl ProblemSpec {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("{}: cannot parse {key}={v:?}", self.family))),
            None => default.ok_or_else(|| Error::usage(format!("{}: missing parameter {key}", self.family))),
        }
    }

    fn dim(&self) -> Result<usize> {
        let n = self.number("n", None)?;
        if n < 1.0 || n.fract() != 0.0 {
            return Err(Error::usage(format!("{}: n must be a positive integer", self.family)));
        }
        Ok(n as usize)
    }

    pub fn build(&self) -> Result<TestProblem> {
        let mut p = match self.family.as_str() {
            "quadratic" => {
                let n = self.dim()?;
                let spectrum = parse_vector(self.get("spectrum").unwrap_or("const(1)"), n)?;
                make_quadratic(n, &spectrum)?
            }
            "holder_power" => {
                let n = self.dim()?;
                let nu = self.number("nu", None)?;
                let center = parse_vector(self.get("center").unwrap_or("const(0)"), n)?;
                make_holder_power(n, nu, &center)?
            }
            "trig" => make_nonconvex_trig(self.dim()?, self.number("a", Some(0.5))?)?,
            "linear" => {
                let n = self.dim()?;
                let c = parse_vector(self.get("c").unwrap_or("const(1)"), n)?;
                make_linear(&c, self.number("offset", Some(0.0))?)?
            }
            "constant" => make_constant(self.dim()?, self.number("value", Some(0.0))?)?,
            other => return Err(Error::usage(format!("unknown problem family {other:?}"))),
        };
        p.name = self.to_string();
        Ok(p)
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = split_top_level(s, ':').into_iter();
        let family = parts.next().unwrap_or_default().trim().to_string();
        if family.is_empty() {
            return Err(Error::usage("empty problem spec"));
        }
        let mut params = BTreeMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("problem parameter {part:?} is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { family, params })
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        for (k, v) in &self.params {
            write!(f, ":{k}={v}")?;
        }
        Ok(())
    }
}

pub fn build_problem(spec: &str) -> Result<TestProblem> {
    spec.parse::<ProblemSpec>()?.build()
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// `geom(a,b)`, `lin(a,b)`, `const(v)` or `list(v1,...,vn)`, expanded to length `n`.
pub fn parse_vector(s: &str, n: usize) -> Result<Vec<f64>> {
    let s = s.trim();
    let (head, args) = s
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| Error::usage(format!("cannot parse vector spec {s:?}")))?;
    let args: Vec<f64> = args
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::usage(format!("non-numeric argument in {s:?}")))?;
    let interp = |t: f64, a: f64, b: f64, geometric: bool| {
        if geometric {
            a * (b / a).powf(t)
        } else {
            a + (b - a) * t
        }
    };
    let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match (head.trim(), args.as_slice()) {
        ("const", [v]) => Ok(vec![*v; n]),
        ("geom", [a, b]) if *a > 0.0 && *b > 0.0 => Ok((0..n).map(|i| interp(frac(i), *a, *b, true)).collect()),
        ("lin", [a, b]) => Ok((0..n).map(|i| interp(frac(i), *a, *b, false)).collect()),
        ("list", vals) if vals.len() == n => Ok(vals.to_vec()),
        _ => Err(Error::usage(format!("invalid vector spec {s:?} for n = {n}"))),
    }
}
