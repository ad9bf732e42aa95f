//! Planar rigid-body model of the floating platform: parameters, state and
//! control types, the continuous dynamics, analytic Jacobians and a fixed-step
//! RK4 integrator.
//!
//! Control layout is `[tau, f0, .., f7]` and state layout is
//! `[x, y, theta, x_dot, y_dot, theta_dot, omega_rw]`.

use nalgebra::{SMatrix, SVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const STATE_DIM: usize = 7;
pub const CONTROL_DIM: usize = 9;
pub const THRUSTER_COUNT: usize = 8;

pub type StateVector<T> = SVector<T, STATE_DIM>;
pub type ControlVector<T> = SVector<T, CONTROL_DIM>;
pub type StateMatrix<T> = SMatrix<T, STATE_DIM, STATE_DIM>;
pub type InputMatrix<T> = SMatrix<T, STATE_DIM, CONTROL_DIM>;

/// Body-frame unit direction of each thruster's force. Counter-facing pairs are
/// `(0, 1)`, `(2, 3)`, `(4, 5)` and `(6, 7)`.
pub const THRUSTER_DIRECTIONS: [[f64; 2]; THRUSTER_COUNT] = [
    [0.0, 1.0],
    [0.0, -1.0],
    [-1.0, 0.0],
    [1.0, 0.0],
    [0.0, -1.0],
    [0.0, 1.0],
    [1.0, 0.0],
    [-1.0, 0.0],
];

/// Sign of each thruster's moment about the body axis (times the arm `r`).
pub const THRUSTER_TORQUE_SIGNS: [f64; THRUSTER_COUNT] =
    [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];

/// Inertial, geometric and actuator-limit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlatformParams<T> {
    /// Total mass [kg].
    pub mass_total: T,
    /// Moment of inertia of the whole stack about the vertical axis [kg m^2].
    pub inertia_body: T,
    /// Reaction-wheel moment of inertia [kg m^2].
    pub inertia_wheel: T,
    /// Thruster moment arm [m].
    pub thruster_arm: T,
    /// Thrust of a single open valve [N].
    pub thrust_max: T,
    /// Reaction-wheel motor torque limit [N m].
    pub rw_torque_max: T,
    /// Reaction-wheel speed limit [rad/s].
    pub rw_speed_max: T,
    /// Gravitational acceleration [m/s^2].
    pub gravity: T,
}

impl<T: Real> Default for PlatformParams<T> {
    fn default() -> Self {
        Self {
            mass_total: T::lit(221.67),
            inertia_body: T::lit(12.223),
            inertia_wheel: T::lit(0.047),
            thruster_arm: T::lit(0.35),
            thrust_max: T::lit(10.0),
            rw_torque_max: T::lit(0.5),
            rw_speed_max: T::lit(300.0),
            gravity: T::lit(9.81),
        }
    }
}

impl<T: Real> PlatformParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass_total", self.mass_total),
            ("inertia_body", self.inertia_body),
            ("inertia_wheel", self.inertia_wheel),
            ("thruster_arm", self.thruster_arm),
            ("thrust_max", self.thrust_max),
            ("rw_torque_max", self.rw_torque_max),
            ("rw_speed_max", self.rw_speed_max),
            ("gravity", self.gravity),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::Domain(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.inertia_wheel >= self.inertia_body {
            return Err(Error::Domain(
                "inertia_wheel must be smaller than inertia_body".into(),
            ));
        }
        Ok(())
    }
}

/// Full platform state. `theta` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub x_dot: T,
    pub y_dot: T,
    pub theta_dot: T,
    pub omega_rw: T,
}

/// Time derivative of [`State`], slot for slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub x_dot: T,
    pub y_dot: T,
    pub theta_dot: T,
    pub omega_rw: T,
}

macro_rules! seven_slot_conversions {
    ($ty:ident) => {
        impl<T: Real> $ty<T> {
            pub fn from_array(a: [T; STATE_DIM]) -> Self {
                Self {
                    x: a[0],
                    y: a[1],
                    theta: a[2],
                    x_dot: a[3],
                    y_dot: a[4],
                    theta_dot: a[5],
                    omega_rw: a[6],
                }
            }

            pub fn to_array(&self) -> [T; STATE_DIM] {
                [
                    self.x,
                    self.y,
                    self.theta,
                    self.x_dot,
                    self.y_dot,
                    self.theta_dot,
                    self.omega_rw,
                ]
            }

            pub fn from_vector(v: &StateVector<T>) -> Self {
                Self::from_array([v[0], v[1], v[2], v[3], v[4], v[5], v[6]])
            }

            pub fn to_vector(&self) -> StateVector<T> {
                StateVector::from(self.to_array())
            }

            pub fn is_finite(&self) -> bool {
                self.to_array().iter().all(|v| v.is_finite())
            }
        }
    };
}

seven_slot_conversions!(State);
seven_slot_conversions!(StateDerivative);

impl<T: Real> State<T> {
    /// Rest state at the given pose.
    pub fn at_pose(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta,
            ..Self::zero()
        }
    }

    pub fn zero() -> Self {
        Self::from_array([T::zero(); STATE_DIM])
    }
}

/// Reaction-wheel torque plus the eight thruster forces.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control<T> {
    pub tau: T,
    pub thrust: [T; THRUSTER_COUNT],
}

impl<T: Real> Control<T> {
    pub fn zero() -> Self {
        Self {
            tau: T::zero(),
            thrust: [T::zero(); THRUSTER_COUNT],
        }
    }

    pub fn from_array(a: [T; CONTROL_DIM]) -> Self {
        let mut thrust = [T::zero(); THRUSTER_COUNT];
        thrust.copy_from_slice(&a[1..]);
        Self { tau: a[0], thrust }
    }

    pub fn to_array(&self) -> [T; CONTROL_DIM] {
        let mut a = [T::zero(); CONTROL_DIM];
        a[0] = self.tau;
        a[1..].copy_from_slice(&self.thrust);
        a
    }

    pub fn from_vector(v: &ControlVector<T>) -> Self {
        let mut a = [T::zero(); CONTROL_DIM];
        a.copy_from_slice(v.as_slice());
        Self::from_array(a)
    }

    pub fn to_vector(&self) -> ControlVector<T> {
        ControlVector::from(self.to_array())
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite() && self.thrust.iter().all(|f| f.is_finite())
    }

    /// True when every thrust lies in `[0, thrust_max]` and `|tau| <= rw_torque_max`.
    pub fn within_continuous_bounds(&self, p: &PlatformParams<T>) -> bool {
        self.tau.abs() <= p.rw_torque_max
            && self
                .thrust
                .iter()
                .all(|&f| f >= T::zero() && f <= p.thrust_max)
    }

    /// True when every thrust is exactly `0` or `thrust_max`.
    pub fn is_binary(&self, p: &PlatformParams<T>) -> bool {
        self.thrust
            .iter()
            .all(|&f| f == T::zero() || f == p.thrust_max)
    }
}

/// World-frame force and body torque produced by the thrusters at heading `theta`.
fn thruster_wrench<T: Real>(theta: T, thrust: &[T; THRUSTER_COUNT], arm: T) -> (T, T, T) {
    let (s, c) = theta.sin_cos();
    let mut fx = T::zero();
    let mut fy = T::zero();
    let mut torque = T::zero();
    for (i, &f) in thrust.iter().enumerate() {
        let [dx, dy] = THRUSTER_DIRECTIONS[i];
        let (dx, dy) = (T::lit(dx), T::lit(dy));
        fx += f * (c * dx - s * dy);
        fy += f * (s * dx + c * dy);
        torque += f * T::lit(THRUSTER_TORQUE_SIGNS[i]);
    }
    (fx, fy, torque * arm)
}

/// Right-hand side of the equations of motion, without input validation.
pub fn dynamics<T: Real>(
    s: &StateVector<T>,
    u: &ControlVector<T>,
    p: &PlatformParams<T>,
    w: &Vector2<T>,
) -> StateVector<T> {
    let mut thrust = [T::zero(); THRUSTER_COUNT];
    thrust.copy_from_slice(&u.as_slice()[1..]);
    let tau = u[0];
    let (fx, fy, thruster_torque) = thruster_wrench(s[2], &thrust, p.thruster_arm);
    StateVector::from([
        s[3],
        s[4],
        s[5],
        fx / p.mass_total + w[0],
        fy / p.mass_total + w[1],
        (thruster_torque - tau) / p.inertia_body,
        tau / p.inertia_wheel,
    ])
}

/// Continuous dynamics with the disturbance acceleration `w` acting on the
/// translational rows only.
pub fn state_derivative<T: Real>(
    s: &State<T>,
    u: &Control<T>,
    p: &PlatformParams<T>,
    w: [T; 2],
) -> Result<StateDerivative<T>> {
    if !s.is_finite() || !u.is_finite() || !w.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(
            "non-finite state, control or disturbance".into(),
        ));
    }
    let d = dynamics(&s.to_vector(), &u.to_vector(), p, &Vector2::new(w[0], w[1]));
    Ok(StateDerivative::from_vector(&d))
}

/// One classical RK4 step of length `dt` with the input and disturbance held.
pub fn rk4_step<T: Real>(
    s: &StateVector<T>,
    u: &ControlVector<T>,
    p: &PlatformParams<T>,
    w: &Vector2<T>,
    dt: T,
) -> StateVector<T> {
    let half = T::lit(0.5) * dt;
    let k1 = dynamics(s, u, p, w);
    let k2 = dynamics(&(s + k1 * half), u, p, w);
    let k3 = dynamics(&(s + k2 * half), u, p, w);
    let k4 = dynamics(&(s + k3 * dt), u, p, w);
    s + (k1 + (k2 + k3) * T::lit(2.0) + k4) * (dt / T::lit(6.0))
}

pub fn integrate_step<T: Real>(
    s: &State<T>,
    u: &Control<T>,
    p: &PlatformParams<T>,
    w: [T; 2],
    dt: T,
) -> Result<State<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Domain(format!(
            "integration step must be > 0, got {dt}"
        )));
    }
    if !s.is_finite() || !u.is_finite() || !w.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(
            "non-finite state, control or disturbance".into(),
        ));
    }
    let next = rk4_step(
        &s.to_vector(),
        &u.to_vector(),
        p,
        &Vector2::new(w[0], w[1]),
        dt,
    );
    Ok(State::from_vector(&next))
}

/// Analytic Jacobians `(df/dx, df/du)` of [`dynamics`].
pub fn jacobians<T: Real>(
    s: &StateVector<T>,
    u: &ControlVector<T>,
    p: &PlatformParams<T>,
) -> (StateMatrix<T>, InputMatrix<T>) {
    let (sn, cs) = s[2].sin_cos();
    let m = p.mass_total;
    let mut a = StateMatrix::zeros();
    a[(0, 3)] = T::one();
    a[(1, 4)] = T::one();
    a[(2, 5)] = T::one();

    let mut b = InputMatrix::zeros();
    b[(5, 0)] = -T::one() / p.inertia_body;
    b[(6, 0)] = T::one() / p.inertia_wheel;

    let mut dfx_dtheta = T::zero();
    let mut dfy_dtheta = T::zero();
    for i in 0..THRUSTER_COUNT {
        let [dx, dy] = THRUSTER_DIRECTIONS[i];
        let (dx, dy) = (T::lit(dx), T::lit(dy));
        let f = u[i + 1];
        b[(3, i + 1)] = (cs * dx - sn * dy) / m;
        b[(4, i + 1)] = (sn * dx + cs * dy) / m;
        b[(5, i + 1)] = T::lit(THRUSTER_TORQUE_SIGNS[i]) * p.thruster_arm / p.inertia_body;
        dfx_dtheta += f * (-sn * dx - cs * dy);
        dfy_dtheta += f * (cs * dx - sn * dy);
    }
    a[(3, 2)] = dfx_dtheta / m;
    a[(4, 2)] = dfy_dtheta / m;
    (a, b)
}

/// Linearization of the dynamics about `(s, u)`.
pub fn linearize<T: Real>(
    s: &State<T>,
    u: &Control<T>,
    p: &PlatformParams<T>,
) -> Result<(StateMatrix<T>, InputMatrix<T>)> {
    if !s.is_finite() || !u.is_finite() {
        return Err(Error::Domain("non-finite linearization point".into()));
    }
    Ok(jacobians(&s.to_vector(), &u.to_vector(), p))
}

/// `I_b * theta_dot + I_w * omega_rw`.
pub fn total_angular_momentum<T: Real>(s: &State<T>, p: &PlatformParams<T>) -> T {
    p.inertia_body * s.theta_dot + p.inertia_wheel * s.omega_rw
}
