//! Bounded oracle noise: every model returns a deviation `e(x)` with
//! `|e(x)| ≤ δ`, so `f̃(x, δ) = f(x) + e(x)` satisfies the inexact-oracle band.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency of the deterministic sine perturbation.
pub const SINE_FREQUENCY: f64 = 1e3;

/// Default lattice spacing of the adversarial sign pattern.
pub const DEFAULT_SIGN_CELL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// Additive i.i.d. `Uniform[−δ, δ]`, one draw per oracle query.
    Uniform,
    /// `δ·sin(10³ Σᵢ xᵢ)`: biased and does not average out.
    DeterministicSine,
    /// `±δ` with the sign fixed by a hash of the lattice cell containing `x`.
    AdversarialSign,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::None,
        NoiseKind::Uniform,
        NoiseKind::DeterministicSine,
        NoiseKind::AdversarialSign,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Uniform => "uniform",
            NoiseKind::DeterministicSine => "deterministic_sine",
            NoiseKind::AdversarialSign => "adversarial_sign",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::usage(format!("unknown noise kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub delta: f64,
    pub seed: u64,
    /// Lattice spacing for `AdversarialSign`; `0` hashes the raw bit pattern
    /// of `x`, which makes the sign independent between any two distinct points.
    pub cell: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::usage(format!("noise level must be finite and >= 0, got {delta}")));
        }
        Ok(Self { kind, delta, seed, cell: DEFAULT_SIGN_CELL })
    }

    pub fn parse(kind: &str, delta: f64, seed: u64) -> Result<Self> {
        Self::new(kind.parse()?, delta, seed)
    }

    pub fn exact() -> Self {
        Self { kind: NoiseKind::None, delta: 0.0, seed: 0, cell: DEFAULT_SIGN_CELL }
    }

    pub fn with_cell(mut self, cell: f64) -> Result<Self> {
        if !(cell >= 0.0 && cell.is_finite()) {
            return Err(Error::usage(format!("sign cell must be finite and >= 0, got {cell}")));
        }
        self.cell = cell;
        Ok(self)
    }

    /// The deviation `f̃(x) − f(x)` for the `query`-th oracle call at `x`.
    pub fn deviation(&self, x: &[f64], query: u64) -> f64 {
        if self.delta == 0.0 {
            return 0.0;
        }
        let e = match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Uniform => {
                let bits = splitmix64(self.seed ^ splitmix64(query));
                // 53 random mantissa bits mapped onto [-1, 1]
                let unit = (bits >> 11) as f64 / (1u64 << 53) as f64;
                self.delta * (2.0 * unit - 1.0)
            }
            NoiseKind::DeterministicSine => {
                let s: f64 = x.iter().sum();
                self.delta * (SINE_FREQUENCY * s).sin()
            }
            NoiseKind::AdversarialSign => {
                if self.sign_bit(x) {
                    self.delta
                } else {
                    -self.delta
                }
            }
        };
        e.clamp(-self.delta, self.delta)
    }

    fn sign_bit(&self, x: &[f64]) -> bool {
        let mut h = splitmix64(self.seed ^ 0x5eed_5eed_5eed_5eed);
        for &v in x {
            let key = if self.cell > 0.0 {
                (v / self.cell).floor() as i64 as u64
            } else {
                v.to_bits()
            };
            h = splitmix64(h ^ key);
        }
        h & 1 == 1
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
