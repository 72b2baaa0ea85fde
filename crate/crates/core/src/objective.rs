use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hölder class of a gradient: `‖∇f(y) − ∇f(x)‖* ≤ L_ν ‖y − x‖^ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderClass {
    pub nu: f64,
    pub l_nu: f64,
}

impl HolderClass {
    pub fn new(nu: f64, l_nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::usage(format!("Hölder exponent must lie in [0, 1], got {nu}")));
        }
        if !(l_nu >= 0.0 && l_nu.is_finite()) {
            return Err(Error::usage(format!("Hölder constant must be finite and >= 0, got {l_nu}")));
        }
        Ok(Self { nu, l_nu })
    }
}

/// A deterministic objective `f: E → ℝ`.
///
/// `grad_into` is only implemented by analytic test problems; oracle-only
/// objectives keep the default and report the gradient as unavailable.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// Writes `∇f(x)` into `out` and returns `true`, or returns `false` when no
    /// analytic gradient exists.
    fn grad_into(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    fn holder(&self) -> HolderClass;

    /// A user-supplied lower bound on `inf f`.
    fn f_star_lower(&self) -> f64;

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        self.grad_into(x, &mut g).then_some(g)
    }

    fn has_gradient(&self) -> bool {
        let x = vec![0.0; self.dim()];
        let mut g = vec![0.0; self.dim()];
        self.grad_into(&x, &mut g)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> bool {
        (**self).grad_into(x, out)
    }
    fn holder(&self) -> HolderClass {
        (**self).holder()
    }
    fn f_star_lower(&self) -> f64 {
        (**self).f_star_lower()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> bool {
        (**self).grad_into(x, out)
    }
    fn holder(&self) -> HolderClass {
        (**self).holder()
    }
    fn f_star_lower(&self) -> f64 {
        (**self).f_star_lower()
    }
}

/// `α·f`, used to check scaling equivariance of the estimators.
#[derive(Clone, Debug)]
pub struct Scaled<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O: Objective> Objective for Scaled<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.eval(x)
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) -> bool {
        if !self.inner.grad_into(x, out) {
            return false;
        }
        out.iter_mut().for_each(|g| *g *= self.factor);
        true
    }
    fn holder(&self) -> HolderClass {
        let h = self.inner.holder();
        HolderClass { nu: h.nu, l_nu: h.l_nu * self.factor.abs() }
    }
    fn f_star_lower(&self) -> f64 {
        if self.factor >= 0.0 {
            self.factor * self.inner.f_star_lower()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Wraps a closure as an oracle-only objective (no analytic gradient).
pub struct FnObjective<F> {
    n: usize,
    f: F,
    holder: HolderClass,
    f_star_lower: f64,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnObjective<F> {
    pub fn new(n: usize, holder: HolderClass, f_star_lower: f64, f: F) -> Self {
        Self { n, f, holder, f_star_lower }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn holder(&self) -> HolderClass {
        self.holder
    }
    fn f_star_lower(&self) -> f64 {
        self.f_star_lower
    }
}
