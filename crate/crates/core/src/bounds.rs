//! Closed forms for the smoothing bounds, step size, smoothing radius,
//! noise ceilings and iteration budgets.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::HolderClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `A₁ = L n^{(1+ν)/2} / μ^{1−ν}`, `A₂ = 0`.
    Smooth,
    /// `A₁ = δ̂^{−(1−ν)/(1+ν)} · 2L / μ^{1−ν}`, `A₂ = δ̂ L μ^{1+ν}`.
    Direct,
    /// `A₁ = L₁`, `A₂ = 0`: `∇f_μ` inherits the Lipschitz constant when `ν = 1`.
    Refined,
}

/// Coefficients of `|f_μ(y) − f_μ(x) − ⟨∇f_μ(x), y−x⟩| ≤ A₁/2 ‖y−x‖² + A₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct APair {
    pub a1: f64,
    pub a2: f64,
    pub branch: Branch,
    pub delta_hat: Option<f64>,
}

/// Convergence guarantee a plan is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Stationarity of `f` itself; `ν ∈ (0, 1]`.
    T1,
    /// Stationarity of `f_μ` with a small function gap; `ν ∈ [0, 1]`.
    T2,
    /// Lipschitz-gradient refinement with `A₁ = L₁`; `ν = 1`.
    NU1,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::T1 => "T1",
            Theorem::T2 => "T2",
            Theorem::NU1 => "NU1",
        }
    }

    /// `(possible ν, N order, δ order)` as printed in the rate table.
    pub fn table_row(self) -> (&'static str, &'static str, &'static str) {
        match self {
            Theorem::T1 => ("nu in (0,1]", "n^(2+(1-nu)/(2nu)) / eps^(1/nu)", "eps^((3+nu)/(4nu)) / n^((3+7nu)/(4nu))"),
            Theorem::T2 => ("nu in [0,1]", "n^((7-3nu)/2) / eps^((3-nu)/(1+nu))", "eps^((5-nu)/(2(1+nu))) / n^((13-3nu)/4)"),
            Theorem::NU1 => ("nu = 1", "n / eps", "eps / n^(5/2)"),
        }
    }

    /// Rejects exponents outside the theorem's admissible range.
    pub fn check_nu(self, nu: f64) -> Result<()> {
        let ok = match self {
            Theorem::T1 => nu > 0.0 && nu <= 1.0,
            Theorem::T2 => (0.0..=1.0).contains(&nu),
            Theorem::NU1 => nu == 1.0,
        };
        if ok {
            Ok(())
        } else {
            let (possible, _, _) = self.table_row();
            Err(Error::usage(format!(
                "policy {} requires {possible} (Possible nu column of the rate table), got nu = {nu}",
                self.as_str()
            )))
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Theorem::T1),
            "T2" => Ok(Theorem::T2),
            "NU1" => Ok(Theorem::NU1),
            _ => Err(Error::usage(format!("unknown theorem {s:?}"))),
        }
    }
}

fn nf(n: usize) -> f64 {
    n as f64
}

pub fn a_pair(branch: Branch, holder: HolderClass, mu: f64, n: usize, delta_hat: Option<f64>) -> Result<APair> {
    let HolderClass { nu, l_nu: l } = holder;
    if !(mu > 0.0) {
        return Err(Error::usage(format!("smoothing radius must be positive, got {mu}")));
    }
    let mu_pow = mu.powf(1.0 - nu);
    match branch {
        Branch::Smooth => Ok(APair {
            a1: l * nf(n).powf((1.0 + nu) / 2.0) / mu_pow,
            a2: 0.0,
            branch,
            delta_hat: None,
        }),
        Branch::Refined => {
            if nu != 1.0 {
                return Err(Error::usage(format!("refined A-pair requires nu = 1, got {nu}")));
            }
            Ok(APair { a1: l, a2: 0.0, branch, delta_hat: None })
        }
        Branch::Direct => {
            let dh = delta_hat.ok_or_else(|| Error::usage("direct branch requires delta_hat"))?;
            if !(dh > 0.0) {
                return Err(Error::usage(format!("delta_hat must be positive, got {dh}")));
            }
            Ok(APair {
                a1: (1.0 / dh).powf((1.0 - nu) / (1.0 + nu)) * 2.0 * l / mu_pow,
                a2: dh * l * mu.powf(1.0 + nu),
                branch,
                delta_hat: Some(dh),
            })
        }
    }
}

/// `δ̂ = (n+6)^{(1+ν)/2}`, the choice that equalises powers of `n`.
pub fn theorem_delta_hat(n: usize, nu: f64) -> f64 {
    (nf(n) + 6.0).powf((1.0 + nu) / 2.0)
}

/// `(δ√n/μ, μ^ν L n^{ν/2}, sum)`.
pub fn grad_gap_bounds(holder: HolderClass, mu: f64, delta: f64, n: usize) -> (f64, f64, f64) {
    let noisy = delta * nf(n).sqrt() / mu;
    let smooth = mu.powf(holder.nu) * holder.l_nu * nf(n).powf(holder.nu / 2.0);
    (noisy, smooth, noisy + smooth)
}

/// `L/(1+ν) μ^{1+ν} n^{(1+ν)/2}`.
pub fn func_gap_bound(holder: HolderClass, mu: f64, n: usize) -> f64 {
    let p = 1.0 + holder.nu;
    holder.l_nu / p * mu.powf(p) * nf(n).powf(p / 2.0)
}

/// `2‖∇f_μ‖*² + 2μ^{2ν}L²n^ν`.
pub fn grad_transfer_bound(holder: HolderClass, mu: f64, n: usize, grad_fmu_sq: f64) -> f64 {
    2.0 * grad_fmu_sq + grad_transfer_additive(holder, mu, nf(n).powf(holder.nu))
}

/// As [`grad_transfer_bound`] with `n^{2ν}` in the additive term.
pub fn grad_transfer_bound_wide(holder: HolderClass, mu: f64, n: usize, grad_fmu_sq: f64) -> f64 {
    2.0 * grad_fmu_sq + grad_transfer_additive(holder, mu, nf(n).powf(2.0 * holder.nu))
}

fn grad_transfer_additive(holder: HolderClass, mu: f64, n_factor: f64) -> f64 {
    2.0 * mu.powf(2.0 * holder.nu) * holder.l_nu * holder.l_nu * n_factor
}

/// `20(n+4)‖∇f_μ‖² + 5(4δ²n/μ² + 4L²μ^{2ν}n^{2+ν}/(1+ν)² + μ²A₁²(n+6)³/4 + A₂²n/μ²)`.
pub fn second_moment_bound(holder: HolderClass, mu: f64, delta: f64, n: usize, apair: &APair, grad_fmu_sq: f64) -> f64 {
    let HolderClass { nu, l_nu: l } = holder;
    let n = nf(n);
    let mu2 = mu * mu;
    let inner = 4.0 * delta * delta * n / mu2
        + 4.0 * l * l * mu.powf(2.0 * nu) * n.powf(2.0 + nu) / ((1.0 + nu) * (1.0 + nu))
        + mu2 * apair.a1 * apair.a1 * (n + 6.0).powi(3) / 4.0
        + apair.a2 * apair.a2 * n / mu2;
    20.0 * (n + 4.0) * grad_fmu_sq + 5.0 * inner
}

/// `h = D / (80(n+4)A₁)`.
pub fn step_size(d: f64, n: usize, a1: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::usage(format!("D must lie in (0, 1], got {d}")));
    }
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::usage(format!("A1 must be positive, got {a1}")));
    }
    Ok(d / (80.0 * (nf(n) + 4.0) * a1))
}

/// `M` from the explicit `M·n^{1+ν}` sums; NU1 uses the T1 expression.
pub fn m_constant(theorem: Theorem, holder: HolderClass, n: usize) -> f64 {
    let HolderClass { nu, l_nu: l } = holder;
    let n = nf(n);
    let base = n.powf((nu - 1.0) / 2.0);
    let bracket = 4.0 * base
        + 4.0 * l * l / ((1.0 + nu) * (1.0 + nu)) * n.powf(2.0 + nu)
        + 2.0 * l * l * (n + 3.0) * (n + 6.0).powf(1.0 + nu);
    let linear = base + 2.0 * l * n.powf(nu);
    let m_n = match theorem {
        // the trailing μ^{2ν}L²n^ν uses μ^{2ν} ≤ 1
        Theorem::T1 | Theorem::NU1 => bracket / (4.0 * (n + 4.0)) + 160.0 * (n + 4.0) * linear + l * l * n.powf(nu),
        Theorem::T2 => bracket / (8.0 * (n + 4.0)) + 80.0 * (n + 4.0) * linear,
    };
    m_n / n.powf(1.0 + nu)
}

/// Largest admissible smoothing radius, clamped below 1.
pub fn mu0(theorem: Theorem, holder: HolderClass, n: usize, eps_grad: f64) -> Result<f64> {
    if !(eps_grad > 0.0) {
        return Err(Error::usage(format!("target accuracy must be positive, got {eps_grad}")));
    }
    theorem.check_nu(holder.nu)?;
    let mn = m_constant(theorem, holder, n) * nf(n).powf(1.0 + holder.nu);
    let e = match theorem {
        Theorem::T1 | Theorem::NU1 => 1.0 / (2.0 * holder.nu),
        Theorem::T2 => 1.0 / (1.0 + holder.nu),
    };
    let mu = (eps_grad / mn).powf(e);
    if mu >= 1.0 {
        log::warn!("smoothing radius {mu} clamped below 1");
        return Ok(1.0 - f64::EPSILON);
    }
    Ok(mu)
}

/// Noise ceiling: `μ^{(3+ν)/2} / n^{(3−ν)/4}` (T1, NU1) or `μ^{(5−ν)/2} / n^{(3−ν)/4}` (T2).
pub fn delta_max(theorem: Theorem, mu: f64, n: usize, nu: f64) -> f64 {
    let a = match theorem {
        Theorem::T1 | Theorem::NU1 => (3.0 + nu) / 2.0,
        Theorem::T2 => (5.0 - nu) / 2.0,
    };
    mu.powf(a) / nf(n).powf((3.0 - nu) / 4.0)
}

/// Iteration budget `⌈2·C·f_gap/ε⌉` with the explicit first-term coefficient.
pub fn n_budget(theorem: Theorem, holder: HolderClass, n: usize, eps_grad: f64, f_gap: f64) -> Result<u64> {
    if !(eps_grad > 0.0) {
        return Err(Error::usage(format!("target accuracy must be positive, got {eps_grad}")));
    }
    if !(f_gap >= 0.0 && f_gap.is_finite()) {
        return Err(Error::usage(format!("f_gap must be finite and >= 0, got {f_gap}")));
    }
    theorem.check_nu(holder.nu)?;
    let HolderClass { nu, l_nu: l } = holder;
    let nn = nf(n);
    let m = m_constant(theorem, holder, n);
    let c = match theorem {
        Theorem::T1 => {
            640.0 * (nn + 4.0)
                * nn.powf((1.0 - nu) * (1.0 + nu) / (2.0 * nu))
                * l
                * m.powf((1.0 - nu) / (2.0 * nu))
                * nn.powf((1.0 + nu) / 2.0)
                / eps_grad.powf((1.0 - nu) / nu)
        }
        Theorem::T2 => {
            320.0 * (nn + 4.0)
                * nn.powf(2.0 - 2.0 * nu)
                * l
                * m.powf((2.0 - 2.0 * nu) / (1.0 + nu))
                * nn.powf((1.0 + nu) / 2.0)
                / eps_grad.powf((2.0 - 2.0 * nu) / (1.0 + nu))
        }
        Theorem::NU1 => 640.0 * (nn + 4.0) * l,
    };
    let budget = (2.0 * c * f_gap / eps_grad).ceil();
    if !(budget.is_finite() && budget < u64::MAX as f64) {
        return Err(Error::usage(format!("iteration budget overflows: {budget}")));
    }
    Ok((budget as u64).max(1))
}

/// `E‖u‖^p` majorant: `n^{p/2}` for `p ≤ 2`, else `(n+p)^{p/2}`.
pub fn moment_bound(n: usize, p: f64) -> f64 {
    if p <= 2.0 {
        nf(n).powf(p / 2.0)
    } else {
        (nf(n) + p).powf(p / 2.0)
    }
}

/// Quadratic majorant of `L t^{1+ν}/(1+ν)` with additive slack `δ̃`.
pub fn holder_to_lipschitz(holder: HolderClass, t: f64, delta_tilde: f64) -> f64 {
    let HolderClass { nu, l_nu: l } = holder;
    let e = (1.0 - nu) / (1.0 + nu);
    let coef = if e == 0.0 { 1.0 } else { (e * 2.0 / delta_tilde).powf(e) };
    0.5 * coef * l.powf(2.0 / (1.0 + nu)) * t * t + delta_tilde
}

pub type Q = Ratio<i64>;

/// `ε^eps · n^n` with rational exponents; constants are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub eps: Q,
    pub n: Q,
}

impl Monomial {
    pub fn pow(self, k: Q) -> Self {
        Self { eps: self.eps * k, n: self.n * k }
    }

    pub fn mul(self, o: Self) -> Self {
        Self { eps: self.eps + o.eps, n: self.n + o.n }
    }
}

/// Order of `μ₀` in `ε` and `n`, treating `M` as a constant.
pub fn mu0_order(theorem: Theorem, nu: Q) -> Monomial {
    let one = Q::from_integer(1);
    let e = match theorem {
        Theorem::T1 | Theorem::NU1 => one / (Q::from_integer(2) * nu),
        Theorem::T2 => one / (one + nu),
    };
    // (M n^{1+ν})^{−e} ε^{e}
    Monomial { eps: e, n: -(one + nu) * e }
}

/// Order of the noise ceiling after substituting `μ = μ₀`.
pub fn delta_max_order(theorem: Theorem, nu: Q) -> Monomial {
    let a = match theorem {
        Theorem::T1 | Theorem::NU1 => (Q::from_integer(3) + nu) / 2,
        Theorem::T2 => (Q::from_integer(5) - nu) / 2,
    };
    let n_part = Monomial { eps: Q::from_integer(0), n: -(Q::from_integer(3) - nu) / 4 };
    mu0_order(theorem, nu).pow(a).mul(n_part)
}

/// Order of the step budget `N` as printed in the rate table.
pub fn budget_order(theorem: Theorem, nu: Q) -> Monomial {
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    match theorem {
        Theorem::T1 => Monomial { eps: -one / nu, n: two + (one - nu) / (two * nu) },
        Theorem::T2 => Monomial { eps: -(Q::from_integer(3) - nu) / (one + nu), n: (Q::from_integer(7) - Q::from_integer(3) * nu) / two },
        Theorem::NU1 => Monomial { eps: -one, n: one },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(nu: f64, l: f64) -> HolderClass {
        HolderClass::new(nu, l).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn a_pair_examples() {
        let p = a_pair(Branch::Smooth, h(1.0, 3.0), 0.2, 5, None).unwrap();
        assert!(close(p.a1, 15.0, 1e-14) && p.a2 == 0.0);
        let p = a_pair(Branch::Direct, h(1.0, 3.0), 0.2, 5, Some(7.0)).unwrap();
        assert!(close(p.a1, 6.0, 1e-14));
        assert!(close(p.a2, 7.0 * 3.0 * 0.04, 1e-14));
        let p = a_pair(Branch::Smooth, h(0.5, 2.0), 0.1, 4, None).unwrap();
        // 2·4^{3/4}/√0.1 = 2·2√2·√10
        let oracle = 2.0 * 2.0 * 2f64.sqrt() * 10f64.sqrt();
        assert!(close(p.a1, oracle, 1e-13), "{}", p.a1);
        assert!((p.a1 - 17.89).abs() < 0.01);
        assert!(a_pair(Branch::Direct, h(0.5, 2.0), 0.1, 4, None).is_err());
        assert!(a_pair(Branch::Smooth, h(0.5, 2.0), 0.0, 4, None).is_err());
    }

    #[test]
    fn gap_examples() {
        let (a, b, c) = grad_gap_bounds(h(1.0, 1.0), 0.1, 0.001, 4);
        assert!(close(a, 0.02, 1e-12) && close(b, 0.2, 1e-12) && close(c, 0.22, 1e-12));
        assert_eq!(c, a + b);
        assert_eq!(grad_gap_bounds(h(0.4, 2.0), 0.3, 0.0, 7).0, 0.0);
        assert!(close(func_gap_bound(h(1.0, 1.0), 0.1, 4), 0.02, 1e-12));
        assert_eq!(func_gap_bound(h(0.5, 1.0), 0.0, 4), 0.0);
        assert_eq!(grad_transfer_bound(h(0.5, 3.0), 0.0, 4, 1.5), 3.0);
        // wide variant only differs for n > 1
        assert!(grad_transfer_bound_wide(h(0.5, 3.0), 0.1, 4, 1.0) > grad_transfer_bound(h(0.5, 3.0), 0.1, 4, 1.0));
    }

    #[test]
    fn second_moment_term_isolation() {
        let (mu, n) = (0.1, 8);
        let hc = h(1.0, 0.0);
        let ap = APair { a1: 2.5, a2: 0.0, branch: Branch::Smooth, delta_hat: None };
        let b = second_moment_bound(hc, mu, 0.0, n, &ap, 0.0);
        assert!(close(b, 5.0 * mu * mu * 2.5 * 2.5 * 14f64.powi(3) / 4.0, 1e-14));
        let mut prev = b;
        for d in [1e-4, 1e-3, 1e-2, 1e-1] {
            let v = second_moment_bound(hc, mu, d, n, &ap, 0.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn step_size_examples() {
        assert!(close(step_size(1.0, 4, 1.0).unwrap(), 1.0 / 640.0, 1e-15));
        assert!(step_size(1.0, 8, 1.0).unwrap() < step_size(1.0, 4, 1.0).unwrap());
        assert!(step_size(1.0, 4, 2.0).unwrap() < step_size(1.0, 4, 1.0).unwrap());
        assert!(step_size(0.0, 4, 1.0).is_err());
        assert!(step_size(1.5, 4, 1.0).is_err());
        assert_eq!(0.3f64.powf(1.0 - 1.0), 1.0);
    }

    #[test]
    fn m_constant_examples() {
        // independent evaluation of the T2 display at L=0, ν=1, n=1: 4/40 + 400
        let m = m_constant(Theorem::T2, h(1.0, 0.0), 1);
        assert!(close(m, 4.0 / 40.0 + 400.0, 1e-14), "{m}");
        for n in [1, 2, 8, 32] {
            for nu in [0.1, 0.5, 1.0] {
                for l in [0.0, 0.5, 2.0, 10.0] {
                    let t1 = m_constant(Theorem::T1, h(nu, l), n);
                    let t2 = m_constant(Theorem::T2, h(nu, l), n);
                    assert!(t1 >= t2);
                    // M = O(1 + L + L²): doubling L at most quadruples M
                    let doubled = m_constant(Theorem::T1, h(nu, 2.0 * l), n);
                    assert!(doubled <= 4.0 * t1 * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn mu0_examples() {
        let hc = h(1.0, 2.0);
        let n = 8;
        let m1 = m_constant(Theorem::T1, hc, n);
        let a = mu0(Theorem::T1, hc, n, 1e-2).unwrap();
        assert!(close(a, (1e-2 / (m1 * 64.0)).sqrt(), 1e-13));
        for nu in [0.0, 0.3, 1.0] {
            let hc = h(nu, 2.0);
            let m2 = m_constant(Theorem::T2, hc, n);
            let v = mu0(Theorem::T2, hc, n, 0.05).unwrap();
            let simplified = 0.05f64.powf(1.0 / (1.0 + nu)) / (n as f64 * m2.powf(1.0 / (1.0 + nu)));
            assert!(close(v, simplified, 1e-12));
            assert!(mu0(Theorem::T2, hc, n, 0.01).unwrap() < v);
        }
        assert!(matches!(mu0(Theorem::T1, h(0.0, 1.0), 4, 0.1), Err(Error::Usage(_))));
        assert!(mu0(Theorem::NU1, h(0.5, 1.0), 4, 0.1).is_err());
        assert!(mu0(Theorem::T2, hc, 4, 0.0).is_err());
        // huge target: clamped
        let big = mu0(Theorem::T2, h(1.0, 0.0), 1, 1e9).unwrap();
        assert!(big < 1.0);
    }

    #[test]
    fn delta_max_examples() {
        assert!(close(delta_max(Theorem::T1, 0.1, 4, 1.0), 0.005, 1e-12));
        assert_eq!(delta_max(Theorem::T1, 0.3, 9, 1.0), delta_max(Theorem::T2, 0.3, 9, 1.0));
        assert!(delta_max(Theorem::T2, 0.2, 4, 0.5) > delta_max(Theorem::T2, 0.1, 4, 0.5));
    }

    #[test]
    fn n_budget_examples() {
        let hc = h(1.0, 3.0);
        let n = 8;
        let t1 = n_budget(Theorem::T1, hc, n, 0.01, 1.0).unwrap();
        assert_eq!(t1, (640.0 * 12.0 * 8.0 * 3.0 / 0.005f64).ceil() as u64);
        let a = n_budget(Theorem::T1, hc, n, 0.01, 1.5).unwrap();
        let b = n_budget(Theorem::T1, hc, n, 0.01, 3.0).unwrap();
        assert!(b == 2 * a || b == 2 * a - 1);
        assert!(n_budget(Theorem::T1, hc, n, 0.0, 1.0).is_err());

        // second path: 2·320(n+4)A₁ f_gap/(D ε) with the smooth A₁ at the
        // unclamped μ₀ and D = μ₀^{1−ν}
        let (nu, l, n, eps, f_gap) = (0.0, 1.0, 4usize, 0.1, 1.0);
        let hc = h(nu, l);
        let mn = m_constant(Theorem::T2, hc, n) * (n as f64).powf(1.0 + nu);
        let mu = (eps / mn).powf(1.0 / (1.0 + nu));
        let a1 = l * (n as f64).powf((1.0 + nu) / 2.0) / mu.powf(1.0 - nu);
        let d = mu.powf(1.0 - nu);
        let second = (2.0 * 320.0 * (n as f64 + 4.0) * a1 * f_gap / (d * eps)).ceil();
        let first = n_budget(Theorem::T2, hc, n, eps, f_gap).unwrap() as f64;
        assert!((first - second).abs() <= 1.0 + 1e-9 * second, "{first} vs {second}");
    }

    #[test]
    fn budget_monotonicity() {
        for th in [Theorem::T1, Theorem::T2] {
            let hc = h(0.6, 1.5);
            let mut prev = u64::MAX;
            for eps in [1e-3, 1e-2, 1e-1, 1.0] {
                let v = n_budget(th, hc, 6, eps, 1.0).unwrap();
                assert!(v <= prev);
                prev = v;
            }
            let mut prev = 0;
            for gap in [0.1, 1.0, 10.0] {
                let v = n_budget(th, hc, 6, 0.1, gap).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn moments_and_lipschitz_majorant() {
        assert_eq!(moment_bound(7, 2.0), 7.0);
        assert_eq!(moment_bound(7, 0.0), 1.0);
        assert_eq!(moment_bound(4, 4.0), 64.0);
        let hc = h(1.0, 2.0);
        assert_eq!(holder_to_lipschitz(hc, 3.0, 0.1), 9.0 + 0.1);
        for k in 1..10 {
            let nu = k as f64 / 10.0;
            let hc = h(nu, 1.7);
            for dt in [0.01, 0.1, 1.0] {
                for i in 0..=1000 {
                    let t = 10.0 * i as f64 / 1000.0;
                    let lhs = 1.7 * t.powf(1.0 + nu) / (1.0 + nu);
                    assert!(lhs <= holder_to_lipschitz(hc, t, dt) * (1.0 + 1e-12), "nu={nu} t={t} dt={dt}");
                }
            }
        }
    }

    #[test]
    fn rate_table_exponents() {
        let one = Q::from_integer(1);
        for k in 1..=10 {
            let nu = Q::new(k, 10);
            let t1 = delta_max_order(Theorem::T1, nu);
            assert_eq!(t1.eps, (Q::from_integer(3) + nu) / (Q::from_integer(4) * nu));
            assert_eq!(t1.n, -(Q::from_integer(3) + Q::from_integer(7) * nu) / (Q::from_integer(4) * nu));
            let t2 = delta_max_order(Theorem::T2, nu);
            assert_eq!(t2.eps, (Q::from_integer(5) - nu) / (Q::from_integer(2) * (one + nu)));
            assert_eq!(t2.n, -(Q::from_integer(13) - Q::from_integer(3) * nu) / 4);
        }
        // at ν = 1 both reduce to ε / n^{5/2}
        let t = delta_max_order(Theorem::T1, one);
        assert_eq!((t.eps, t.n), (one, Q::new(-5, 2)));
    }

    #[test]
    fn budget_exponents() {
        let one = Q::from_integer(1);
        let half = Q::new(1, 2);
        assert_eq!(budget_order(Theorem::T1, half), Monomial { eps: Q::from_integer(-2), n: Q::new(5, 2) });
        assert_eq!(budget_order(Theorem::T2, half), Monomial { eps: Q::new(-5, 3), n: Q::new(11, 4) });
        assert_eq!(budget_order(Theorem::T2, one), Monomial { eps: -one, n: Q::from_integer(2) });
        assert_eq!(budget_order(Theorem::NU1, one), Monomial { eps: -one, n: one });
    }

    #[test]
    fn theorem_parsing() {
        assert_eq!("nu1".parse::<Theorem>().unwrap(), Theorem::NU1);
        assert!("T3".parse::<Theorem>().is_err());
    }
}
