//! Sampled-data feedback stabilization toolkit.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the command-line front end
//! and the tests use.

pub mod error;
pub mod liecalc;
pub mod odeint;
pub mod patchwork;
pub mod sampling;
pub mod scalar;
pub mod sdfctl;
pub mod synth;
pub mod sysmodel;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = synth::Matrix<f64>;
pub type StateVector = sysmodel::StateVector<f64>;
pub type ControlSignal = sysmodel::ControlSignal<f64>;
pub type GeneralSystem = sysmodel::GeneralSystem<f64>;
pub type StateLinearSystem = sysmodel::StateLinearSystem<f64>;
pub type SamplingPartition = sysmodel::SamplingPartition<f64>;
pub type Trajectory = sysmodel::Trajectory<f64>;
pub type IntegrationConfig = odeint::IntegrationConfig<f64>;
pub type GainSynthesisResult = synth::GainSynthesisResult<f64>;
pub type UniformBounds = synth::UniformBounds<f64>;
pub type FrozenGain = sdfctl::FrozenGain<f64>;
pub type ClosedLoopRun = sdfctl::ClosedLoopRun<f64>;
pub type DecreaseCertificate = sdfctl::DecreaseCertificate<f64>;
pub type ConditionReport = liecalc::ConditionReport;
