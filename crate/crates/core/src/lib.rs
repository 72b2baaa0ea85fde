//! Zeroth-order gradient descent with Gaussian smoothing for objectives with
//! Hölder-continuous gradients, queried through a function-value oracle with
//! bounded error `δ`.

pub mod bounds;
pub mod error;
pub mod noise;
pub mod objective;
pub mod oracle;
pub mod problems;
pub mod sampler;
pub mod smoothing;
pub mod solver;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
pub use noise::{NoiseKind, NoiseModel};
pub use objective::{HolderClass, Objective};
pub use oracle::NoisyOracle;
pub use problems::{build_problem, ProblemSpec, TestProblem};
pub use sampler::GaussianSampler;
pub use space::NormSpace;
