use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::objective::Objective;

/// Inexact zeroth-order oracle: `|f̃(x, δ) − f(x)| ≤ δ` on every query.
#[derive(Debug)]
pub struct NoisyOracle<O> {
    base: O,
    noise: NoiseModel,
    calls: AtomicU64,
}

impl<O: Objective> NoisyOracle<O> {
    pub fn new(base: O, noise: NoiseModel) -> Self {
        Self { base, noise, calls: AtomicU64::new(0) }
    }

    /// An oracle that returns `f(x)` exactly.
    pub fn exact(base: O) -> Self {
        Self::new(base, NoiseModel::exact())
    }

    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn delta(&self) -> f64 {
        self.noise.delta
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// `f̃(x, δ)`; counts as one oracle call.
    pub fn query(&self, x: &[f64]) -> Result<f64> {
        let id = self.calls.fetch_add(1, Ordering::Relaxed);
        let f = self.base.eval(x);
        let v = f + self.noise.deviation(x, id);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x: x.to_vec(), value: v })
        }
    }
}
