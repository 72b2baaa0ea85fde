//! Gaussian smoothing: the two-point estimator `g_μ` and Monte-Carlo
//! estimates of `f_μ`, `∇f_μ` and `E‖g_μ‖*²`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::objective::Objective;
use crate::oracle::NoisyOracle;
use crate::sampler::GaussianSampler;
use crate::space::NormSpace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingParams {
    pub mu: f64,
    /// Noise level of the oracle these parameters are used with.
    pub delta: f64,
}

impl SmoothingParams {
    pub fn new(mu: f64, delta: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::usage(format!("smoothing radius must be positive, got {mu}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::usage(format!("noise level must be >= 0, got {delta}")));
        }
        Ok(Self { mu, delta })
    }
}

/// Whether `f̃(x, δ)` is queried once per batch or once per sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BaseQuery {
    #[default]
    PerSample,
    Cached,
}

/// Sample mean with its standard error (unbiased sample variance).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
}

impl McEstimate<Vec<f64>> {
    /// Dual norm of the per-coordinate standard errors; a scale for the
    /// uncertainty of `‖mean‖*`.
    pub fn std_error_norm(&self, space: &NormSpace) -> f64 {
        space.dual_sq(&self.std_error).sqrt()
    }

    /// Unbiased estimate of `‖E[X]‖*²`: `‖mean‖*² − ‖std_error‖*²`, floored at 0.
    pub fn mean_dual_sq_unbiased(&self, space: &NormSpace) -> f64 {
        (space.dual_sq(&self.mean) - space.dual_sq(&self.std_error)).max(0.0)
    }
}

/// Welford accumulator for scalars.
#[derive(Clone, Debug, Default)]
pub struct ScalarStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl ScalarStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn finish(&self) -> McEstimate<f64> {
        McEstimate {
            mean: self.mean,
            std_error: (self.variance() / self.count.max(1) as f64).sqrt(),
            samples: self.count,
        }
    }
}

/// Per-coordinate Welford accumulator.
#[derive(Clone, Debug)]
pub struct VectorStats {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl VectorStats {
    pub fn new(n: usize) -> Self {
        Self { count: 0, mean: vec![0.0; n], m2: vec![0.0; n] }
    }

    pub fn push(&mut self, v: &[f64]) {
        self.push_scaled(1.0, v);
    }

    /// Pushes `a·v`.
    pub fn push_scaled(&mut self, a: f64, v: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(v) {
            let x = a * x;
            let d = x - *m;
            *m += d / k;
            *s += d * (x - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> McEstimate<Vec<f64>> {
        let c = self.count.max(1) as f64;
        let denom = (self.count.max(2) - 1) as f64;
        McEstimate {
            mean: self.mean.clone(),
            std_error: self.m2.iter().map(|s| (s / denom / c).sqrt()).collect(),
            samples: self.count,
        }
    }
}

fn check_samples(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::usage(format!("Monte-Carlo estimates need at least 2 samples, got {m}")));
    }
    Ok(())
}

pub(crate) fn shifted(x: &[f64], mu: f64, u: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(u) {
        *o = a + mu * b;
    }
}

/// The finite-difference coefficient `c = (f̃(x+μu) − f̃(x))/μ`, so that
/// `g_μ = c·Bu` and `B⁻¹g_μ = c·u`. `fx` supplies a cached `f̃(x, δ)`.
pub fn g_mu_coefficient<O: Objective>(
    oracle: &NoisyOracle<O>,
    x: &[f64],
    u: &[f64],
    mu: f64,
    fx: Option<f64>,
    scratch: &mut [f64],
) -> Result<f64> {
    shifted(x, mu, u, scratch);
    let f_plus = oracle.query(scratch)?;
    let f_x = match fx {
        Some(v) => v,
        None => oracle.query(x)?,
    };
    Ok((f_plus - f_x) / mu)
}

/// `g_μ(x, u, δ) = (f̃(x+μu, δ) − f̃(x, δ))/μ · Bu`; two oracle calls.
pub fn g_mu<O: Objective>(
    oracle: &NoisyOracle<O>,
    space: &NormSpace,
    x: &[f64],
    u: &[f64],
    params: &SmoothingParams,
) -> Result<Vec<f64>> {
    check_dim(space.dim(), x.len())?;
    check_dim(space.dim(), u.len())?;
    let mut scratch = vec![0.0; x.len()];
    let c = g_mu_coefficient(oracle, x, u, params.mu, None, &mut scratch)?;
    let mut g = vec![0.0; x.len()];
    space.apply_b_into(u, &mut g);
    g.iter_mut().for_each(|v| *v *= c);
    Ok(g)
}

/// Sample mean of `f(x + μu)`.
pub fn estimate_f_mu<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    mu: f64,
    n_samples: usize,
    sampler: &mut GaussianSampler,
) -> Result<McEstimate<f64>> {
    check_samples(n_samples)?;
    check_dim(sampler.space().dim(), x.len())?;
    let n = x.len();
    let (mut u, mut y) = (vec![0.0; n], vec![0.0; n]);
    let mut stats = ScalarStats::new();
    for _ in 0..n_samples {
        sampler.fill(&mut u);
        shifted(x, mu, &u, &mut y);
        let v = objective.eval(&y);
        if !v.is_finite() {
            return Err(Error::Evaluation { x: y, value: v });
        }
        stats.push(v);
    }
    Ok(stats.finish())
}

/// Sample mean of `g_μ(x, u, δ)` over fresh directions; estimates `∇f̃_μ(x, δ)`
/// (and `∇f_μ(x)` when the oracle is exact). Consumes `2m` oracle calls.
pub fn estimate_grad_f_mu<O: Objective>(
    oracle: &NoisyOracle<O>,
    x: &[f64],
    params: &SmoothingParams,
    n_samples: usize,
    sampler: &mut GaussianSampler,
) -> Result<McEstimate<Vec<f64>>> {
    estimate_grad_f_mu_with(oracle, x, params, n_samples, sampler, BaseQuery::PerSample)
}

/// As [`estimate_grad_f_mu`]; `BaseQuery::Cached` spends `m + 1` calls.
pub fn estimate_grad_f_mu_with<O: Objective>(
    oracle: &NoisyOracle<O>,
    x: &[f64],
    params: &SmoothingParams,
    n_samples: usize,
    sampler: &mut GaussianSampler,
    base: BaseQuery,
) -> Result<McEstimate<Vec<f64>>> {
    check_samples(n_samples)?;
    let space = sampler.space().clone();
    check_dim(space.dim(), x.len())?;
    let n = x.len();
    let fx = match base {
        BaseQuery::Cached => Some(oracle.query(x)?),
        BaseQuery::PerSample => None,
    };
    let (mut u, mut bu, mut scratch) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stats = VectorStats::new(n);
    for _ in 0..n_samples {
        sampler.fill(&mut u);
        let c = g_mu_coefficient(oracle, x, &u, params.mu, fx, &mut scratch)?;
        space.apply_b_into(&u, &mut bu);
        stats.push_scaled(c, &bu);
    }
    Ok(stats.finish())
}

/// Sample mean of `‖g_μ(x, u, δ)‖*² = c²‖u‖²`.
pub fn estimate_second_moment<O: Objective>(
    oracle: &NoisyOracle<O>,
    x: &[f64],
    params: &SmoothingParams,
    n_samples: usize,
    sampler: &mut GaussianSampler,
) -> Result<McEstimate<f64>> {
    check_samples(n_samples)?;
    let space = sampler.space().clone();
    check_dim(space.dim(), x.len())?;
    let n = x.len();
    let (mut u, mut scratch) = (vec![0.0; n], vec![0.0; n]);
    let mut stats = ScalarStats::new();
    for _ in 0..n_samples {
        sampler.fill(&mut u);
        let c = g_mu_coefficient(oracle, x, &u, params.mu, None, &mut scratch)?;
        stats.push(c * c * space.primal_sq(&u));
    }
    Ok(stats.finish())
}

/// `∇f_μ(x) = E[∇f(x + μu)]`, estimated from the analytic gradient.
/// Lower variance than the finite-difference route; needs `grad`.
pub fn estimate_grad_f_mu_from_gradient<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    mu: f64,
    n_samples: usize,
    sampler: &mut GaussianSampler,
) -> Result<McEstimate<Vec<f64>>> {
    check_samples(n_samples)?;
    check_dim(sampler.space().dim(), x.len())?;
    let n = x.len();
    let (mut u, mut y, mut g) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stats = VectorStats::new(n);
    for _ in 0..n_samples {
        sampler.fill(&mut u);
        shifted(x, mu, &u, &mut y);
        if !objective.grad_into(&y, &mut g) {
            return Err(Error::usage("objective has no analytic gradient"));
        }
        stats.push(&g);
    }
    Ok(stats.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{NoiseKind, NoiseModel};
    use crate::objective::Scaled;
    use crate::problems::{make_constant, make_linear, make_nonconvex_trig, make_quadratic};

    fn within(est: &McEstimate<Vec<f64>>, target: &[f64], k: f64) -> bool {
        est.mean
            .iter()
            .zip(&est.std_error)
            .zip(target)
            .all(|((m, s), t)| (m - t).abs() <= k * s + 1e-12)
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, -2.0, 8.5, 3.0];
        let mut s = ScalarStats::new();
        xs.iter().for_each(|&v| s.push(v));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-12);
        assert!((s.variance() - var).abs() < 1e-12);
        assert!((s.finish().std_error - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linear_gradient_is_recovered() {
        let c = [1.0, -2.0, 0.5];
        let o = NoisyOracle::exact(make_linear(&c, 0.3).unwrap());
        let mut s = GaussianSampler::new(NormSpace::identity(3).unwrap(), 1);
        let est = estimate_grad_f_mu(&o, &[0.2, 0.1, -1.0], &SmoothingParams::new(0.1, 0.0).unwrap(), 100_000, &mut s)
            .unwrap();
        assert!(within(&est, &c, 3.0), "{est:?}");
        assert_eq!(o.calls(), 200_000);
    }

    #[test]
    fn quadratic_gradient_is_recovered() {
        let p = make_quadratic(2, &[1.0, 1.0]).unwrap();
        let o = NoisyOracle::exact(p);
        let x = [0.7, -0.4];
        let mut s = GaussianSampler::new(NormSpace::identity(2).unwrap(), 2);
        let params = SmoothingParams::new(0.05, 0.0).unwrap();
        let est = estimate_grad_f_mu(&o, &x, &params, 100_000, &mut s).unwrap();
        assert!(within(&est, &x, 3.0), "{est:?}");

        let q = make_quadratic(4, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let o = NoisyOracle::exact(q.clone());
        let x = [0.5, -0.5, 0.25, 0.1];
        let mut s = GaussianSampler::new(NormSpace::identity(4).unwrap(), 3);
        let est = estimate_grad_f_mu_with(&o, &x, &params, 100_000, &mut s, BaseQuery::Cached).unwrap();
        assert!(within(&est, &q.grad(&x).unwrap(), 3.0), "{est:?}");
        assert_eq!(o.calls(), 100_001);
    }

    #[test]
    fn zero_direction_gives_zero_estimate() {
        let o = NoisyOracle::exact(make_nonconvex_trig(3, 0.5).unwrap());
        let space = NormSpace::identity(3).unwrap();
        let g = g_mu(&o, &space, &[1.0, 2.0, 3.0], &[0.0; 3], &SmoothingParams::new(0.1, 0.0).unwrap()).unwrap();
        assert_eq!(g, vec![0.0; 3]);
        assert_eq!(o.calls(), 2);
    }

    #[test]
    fn scaling_equivariance() {
        let base = make_nonconvex_trig(4, 0.3).unwrap();
        let alpha = 3.7;
        let o1 = NoisyOracle::exact(base.clone());
        let o2 = NoisyOracle::exact(Scaled { inner: base, factor: alpha });
        let space = NormSpace::identity(4).unwrap();
        let params = SmoothingParams::new(0.01, 0.0).unwrap();
        let mut s = GaussianSampler::new(space.clone(), 4);
        let x = [0.3, -1.0, 2.0, 0.0];
        for _ in 0..100 {
            let u = s.sample_u();
            let g1 = g_mu(&o1, &space, &x, &u, &params).unwrap();
            let g2 = g_mu(&o2, &space, &x, &u, &params).unwrap();
            for (a, b) in g1.iter().zip(&g2) {
                assert!((alpha * a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn f_mu_of_unit_quadratic() {
        let n = 3;
        let p = make_quadratic(n, &[1.0; 3]).unwrap();
        let x = [1.0, 0.5, -0.5];
        let mu = 0.3;
        let mut s = GaussianSampler::new(NormSpace::identity(n).unwrap(), 5);
        let est = estimate_f_mu(&p, &x, mu, 100_000, &mut s).unwrap();
        let exact = p.eval(&x) + n as f64 * mu * mu / 2.0;
        assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");

        let l = make_linear(&[1.0, 2.0, 3.0], 0.0).unwrap();
        let est = estimate_f_mu(&l, &x, mu, 100_000, &mut s).unwrap();
        assert!((est.mean - l.eval(&x)).abs() <= 3.0 * est.std_error);

        let t = make_nonconvex_trig(n, 0.5).unwrap();
        let est = estimate_f_mu(&t, &x, 1e-6, 1000, &mut s).unwrap();
        assert!((est.mean - t.eval(&x)).abs() < 1e-4);
    }

    #[test]
    fn adversarial_bias_within_lemma_bound() {
        let n = 4;
        let p = make_quadratic(n, &[1.0; 4]).unwrap();
        let x = [0.5; 4];
        let (mu, delta) = (0.1, 1e-3);
        let params = SmoothingParams::new(mu, delta).unwrap();
        let noisy = NoisyOracle::new(p.clone(), NoiseModel::new(NoiseKind::AdversarialSign, delta, 7).unwrap());
        let mut s = GaussianSampler::new(NormSpace::identity(n).unwrap(), 8);
        let est = estimate_grad_f_mu(&noisy, &x, &params, 100_000, &mut s).unwrap();
        // ∇f_μ = x for the unit quadratic
        let gap = est.mean.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let se = est.std_error.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(gap <= delta / mu * (n as f64).sqrt() + 3.0 * se, "{gap} {se}");
    }

    #[test]
    fn second_moment_bounds() {
        let n = 6;
        let c = [1.0, -1.0, 2.0, 0.0, 0.5, 3.0];
        let o = NoisyOracle::exact(make_linear(&c, 0.0).unwrap());
        let mut s = GaussianSampler::new(NormSpace::identity(n).unwrap(), 9);
        let params = SmoothingParams::new(0.1, 0.0).unwrap();
        let est = estimate_second_moment(&o, &[0.0; 6], &params, 100_000, &mut s).unwrap();
        let c2: f64 = c.iter().map(|v| v * v).sum();
        assert!(est.mean <= (n as f64 + 4.0) * c2 + 3.0 * est.std_error);
        // E[⟨c,u⟩²‖u‖²] = (n+2)‖c‖²
        assert!((est.mean - (n as f64 + 2.0) * c2).abs() <= 4.0 * est.std_error);

        let k = NoisyOracle::exact(make_constant(n, 2.0).unwrap());
        let est = estimate_second_moment(&k, &[1.0; 6], &params, 100, &mut s).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn gradient_route_agrees_with_finite_differences() {
        let p = make_nonconvex_trig(3, 0.7).unwrap();
        let x = [0.4, -1.2, 2.5];
        let mu = 0.2;
        let space = NormSpace::identity(3).unwrap();
        let a = estimate_grad_f_mu_from_gradient(&p, &x, mu, 100_000, &mut GaussianSampler::new(space.clone(), 10))
            .unwrap();
        let o = NoisyOracle::exact(p);
        let b = estimate_grad_f_mu(&o, &x, &SmoothingParams::new(mu, 0.0).unwrap(), 100_000, &mut GaussianSampler::new(space, 11))
            .unwrap();
        for i in 0..3 {
            let se = (a.std_error[i].powi(2) + b.std_error[i].powi(2)).sqrt();
            assert!((a.mean[i] - b.mean[i]).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SmoothingParams::new(0.0, 0.0).is_err());
        assert!(SmoothingParams::new(0.1, -1.0).is_err());
        let p = make_linear(&[1.0], 0.0).unwrap();
        let mut s = GaussianSampler::new(NormSpace::identity(1).unwrap(), 0);
        assert!(estimate_f_mu(&p, &[0.0], 0.1, 1, &mut s).is_err());
        assert!(estimate_f_mu(&p, &[0.0, 1.0], 0.1, 10, &mut s).is_err());
    }
}
