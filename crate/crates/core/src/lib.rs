//! Simulation and optimal control of a planar free-floating platform with
//! eight binary thrusters and a reaction wheel.
//!
//! The pipeline is split the same way the control software is:
//!
//! - [`model`]: parameters, state/control types, dynamics and Jacobians
//! - [`environment`]: floor height-field disturbances and sensor noise
//! - [`planner`]: Hermite-Simpson collocation solved by an augmented-Lagrangian method
//! - [`tracker`]: time-varying LQR along the planned reference
//! - [`actuation`]: sigma-delta thrust modulation and wheel saturation
//! - [`estimator`]: extended Kalman filter on full-state measurements
//! - [`harness`]: scenarios, the closed-loop runner, metrics and outputs
//!
//! The model, environment and actuation code is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the scalar to `f64`, which the
//! planner, tracker and estimator use.

pub mod actuation;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod model;
pub mod planner;
pub mod scalar;
pub mod tracker;

pub use error::{Error, Result};
pub use scalar::{unwrap_near, wrap_angle, Real};

pub type State = model::State<f64>;
pub type Control = model::Control<f64>;
pub type PlatformParams = model::PlatformParams<f64>;
pub type StateDerivative = model::StateDerivative<f64>;
pub type HeightField = environment::HeightField<f64>;
pub type NoiseModel = environment::NoiseModel<f64>;
pub type Measurement = environment::Measurement<f64>;
pub type ModulatorState = actuation::ModulatorState<f64>;

pub type StateF32 = model::State<f32>;
pub type ControlF32 = model::Control<f32>;
pub type PlatformParamsF32 = model::PlatformParams<f32>;
pub type HeightFieldF32 = environment::HeightField<f32>;
pub type ModulatorStateF32 = actuation::ModulatorState<f32>;
