use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{State, STATE_DIM};
use crate::scalar::{wrap_angle, Real};

/// Standard deviations of the additive Gaussian measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel<T> {
    /// Position noise on x and y [m].
    pub sigma_position: T,
    /// Velocity noise on x_dot and y_dot [m/s].
    pub sigma_velocity: T,
    /// Heading noise angle [rad].
    pub sigma_angle: T,
    /// Angular-rate noise [rad/s].
    pub sigma_ang_velocity: T,
    /// Wheel-speed noise [rad/s]; zero means an exact encoder reading.
    pub sigma_omega_rw: T,
    pub seed: u64,
}

impl<T: Real> Default for NoiseModel<T> {
    fn default() -> Self {
        Self {
            sigma_position: T::lit(0.5e-3),
            sigma_velocity: T::lit(2e-3),
            sigma_angle: T::lit(0.1f64.to_radians()),
            sigma_ang_velocity: T::lit(0.05f64.to_radians()),
            sigma_omega_rw: T::zero(),
            seed: 0,
        }
    }
}

impl<T: Real> NoiseModel<T> {
    pub fn noiseless() -> Self {
        Self {
            sigma_position: T::zero(),
            sigma_velocity: T::zero(),
            sigma_angle: T::zero(),
            sigma_ang_velocity: T::zero(),
            sigma_omega_rw: T::zero(),
            seed: 0,
        }
    }

    /// Per-slot standard deviations in state order.
    pub fn sigmas(&self) -> [T; STATE_DIM] {
        [
            self.sigma_position,
            self.sigma_position,
            self.sigma_angle,
            self.sigma_velocity,
            self.sigma_velocity,
            self.sigma_ang_velocity,
            self.sigma_omega_rw,
        ]
    }

    /// Returns a copy with every standard deviation multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            sigma_position: self.sigma_position * factor,
            sigma_velocity: self.sigma_velocity * factor,
            sigma_angle: self.sigma_angle * factor,
            sigma_ang_velocity: self.sigma_ang_velocity * factor,
            sigma_omega_rw: self.sigma_omega_rw * factor,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .sigmas()
            .iter()
            .all(|s| s.is_finite() && *s >= T::zero())
        {
            Ok(())
        } else {
            Err(Error::Config(
                "noise standard deviations must be finite and >= 0".into(),
            ))
        }
    }
}

/// Noisy full-state reading with the heading wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<T>(State<T>);

impl<T: Real> Measurement<T> {
    /// Wraps the heading of `s` and stores it as a reading.
    pub fn new(s: State<T>) -> Self {
        Self(State {
            theta: wrap_angle(s.theta),
            ..s
        })
    }

    pub fn state(&self) -> &State<T> {
        &self.0
    }
}

/// Draws one measurement of `s`.
///
/// Positions, velocities and rates get independent zero-mean Gaussian noise.
/// The heading is composed with a Gaussian noise rotation, which in the plane
/// is an addition followed by wrapping. One standard-normal draw is consumed
/// per slot regardless of the configured sigmas, so streams stay aligned when
/// sigmas change.
pub fn apply_sensor_noise<T, R>(s: &State<T>, n: &NoiseModel<T>, rng: &mut R) -> Measurement<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let sig = n.sigmas();
    let mut v = s.to_array();
    for (slot, sigma) in v.iter_mut().zip(sig) {
        let z: T = rng.sample(StandardNormal);
        *slot += sigma * z;
    }
    Measurement::new(State::from_array(v))
}
