//! Extended Kalman filter on full-state measurements.
//!
//! The prediction integrates the nonlinear dynamics with the binary control
//! that was actually applied; the covariance is propagated through the
//! discretized Jacobian. The measurement matrix is the identity.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::environment::{Measurement, NoiseModel};
use crate::error::{Error, Result};
use crate::model::{
    jacobians, rk4_step, Control, PlatformParams, State, StateMatrix, StateVector, STATE_DIM,
};
use crate::scalar::{unwrap_near, wrap_angle};
use crate::tracker::discretize;

/// Filter tuning. Absent covariances are derived: see
/// [`default_process_noise`] and [`matched_measurement_noise`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Process-noise covariance diagonal per control tick.
    pub q_proc: Option<[f64; STATE_DIM]>,
    /// Measurement-noise covariance diagonal.
    pub r_meas: Option<[f64; STATE_DIM]>,
    /// Lower bound on every derived covariance entry.
    pub variance_floor: f64,
    /// Longest RK4 substep used by the prediction [s].
    pub max_step: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            q_proc: None,
            r_meas: None,
            variance_floor: 1e-10,
            max_step: 1e-3,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::Config("estimator variance_floor must be > 0".into()));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::Config("estimator max_step must be > 0".into()));
        }
        for (name, d) in [("q_proc", self.q_proc), ("r_meas", self.r_meas)] {
            if let Some(d) = d {
                if !d.iter().all(|v| v.is_finite() && *v >= 0.0) {
                    return Err(Error::Config(format!(
                        "estimator {name} entries must be finite and >= 0"
                    )));
                }
            }
        }
        if let Some(r) = self.r_meas {
            if r.iter().any(|v| *v <= 0.0) {
                return Err(Error::Config("estimator r_meas entries must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Process-noise diagonal for a tick of `dt` over a floor whose steepest
    /// slope is `max_slope`.
    pub fn process_noise(&self, max_slope: f64, gravity: f64, dt: f64) -> [f64; STATE_DIM] {
        self.q_proc
            .unwrap_or_else(|| default_process_noise(max_slope, gravity, dt, self.variance_floor))
    }

    pub fn measurement_noise(&self, noise: &NoiseModel<f64>) -> [f64; STATE_DIM] {
        self.r_meas
            .unwrap_or_else(|| matched_measurement_noise(noise, self.variance_floor))
    }
}

/// `(g * max_slope * dt)^2` on the velocity channels, `floor` elsewhere.
pub fn default_process_noise(
    max_slope: f64,
    gravity: f64,
    dt: f64,
    floor: f64,
) -> [f64; STATE_DIM] {
    let v = (gravity * max_slope * dt).powi(2).max(floor);
    [floor, floor, floor, v, v, floor, floor]
}

/// Squared sensor standard deviations, floored so the matrix stays invertible.
pub fn matched_measurement_noise(noise: &NoiseModel<f64>, floor: f64) -> [f64; STATE_DIM] {
    noise.sigmas().map(|s| (s * s).max(floor))
}

fn diag(d: &[f64; STATE_DIM]) -> StateMatrix<f64> {
    StateMatrix::from_diagonal(&StateVector::from(*d))
}

/// Symmetrizes `p` and clips negative eigenvalues to zero.
fn psd_projection(p: &StateMatrix<f64>) -> StateMatrix<f64> {
    let sym = (p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().all(|l| *l >= 0.0) {
        return sym;
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = eig.eigenvectors;
    let out = v * StateMatrix::from_diagonal(&clipped) * v.transpose();
    (out + out.transpose()) * 0.5
}

/// State-difference with the heading difference wrapped to `(-pi, pi]`.
pub fn state_residual(a: &State<f64>, b: &State<f64>) -> StateVector<f64> {
    let mut r = a.to_vector() - b.to_vector();
    r[2] = wrap_angle(a.theta - b.theta);
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub x_hat: State<f64>,
    pub p: StateMatrix<f64>,
    pub q_proc: StateMatrix<f64>,
    pub r_meas: StateMatrix<f64>,
    max_step: f64,
}

impl EstimatorState {
    /// Checks symmetry and definiteness: `P` and `Q` must be PSD, `R` PD.
    pub fn new(
        x_hat: State<f64>,
        p: StateMatrix<f64>,
        q_proc: StateMatrix<f64>,
        r_meas: StateMatrix<f64>,
        max_step: f64,
    ) -> Result<Self> {
        if !x_hat.is_finite() {
            return Err(Error::Domain("non-finite initial estimate".into()));
        }
        if !(max_step > 0.0 && max_step.is_finite()) {
            return Err(Error::Domain(format!(
                "max_step must be > 0, got {max_step}"
            )));
        }
        for (name, m) in [("P", &p), ("Q_proc", &q_proc), ("R_meas", &r_meas)] {
            if !m.iter().all(|v| v.is_finite()) {
                return Err(Error::Domain(format!("{name} has non-finite entries")));
            }
            let asym = (m - m.transpose()).amax();
            if asym > 1e-12 * m.amax().max(1.0) {
                return Err(Error::Domain(format!("{name} is not symmetric")));
            }
        }
        for (name, m) in [("P", &p), ("Q_proc", &q_proc)] {
            let min = SymmetricEigen::new(*m).eigenvalues.min();
            if min < -1e-12 * m.amax().max(1e-300) {
                return Err(Error::Domain(format!(
                    "{name} is not positive semidefinite"
                )));
            }
        }
        if r_meas.cholesky().is_none() {
            return Err(Error::Domain("R_meas must be positive definite".into()));
        }
        Ok(Self {
            x_hat,
            p,
            q_proc,
            r_meas,
            max_step,
        })
    }

    /// Filter seeded with a first measurement and its noise covariance.
    pub fn from_measurement(
        z: &Measurement<f64>,
        q_proc: &[f64; STATE_DIM],
        r_meas: &[f64; STATE_DIM],
        max_step: f64,
    ) -> Result<Self> {
        Self::new(
            *z.state(),
            diag(r_meas),
            diag(q_proc),
            diag(r_meas),
            max_step,
        )
    }

    /// Propagates the estimate over `dt` with `u` held, the disturbance
    /// assumed to be `w`.
    pub fn predict(
        &mut self,
        u: &Control<f64>,
        p: &PlatformParams<f64>,
        w: [f64; 2],
        dt: f64,
    ) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!(
                "prediction step must be > 0, got {dt}"
            )));
        }
        if !u.is_finite() {
            return Err(Error::Domain("non-finite control".into()));
        }
        let uv = u.to_vector();
        let wv = Vector2::new(w[0], w[1]);
        let (a, _) = jacobians(&self.x_hat.to_vector(), &uv, p);
        let (f, _) = discretize::<STATE_DIM, 1>(&a, &nalgebra::SMatrix::zeros(), dt);
        let n = (dt / self.max_step - 1e-9).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        let mut x = self.x_hat.to_vector();
        for _ in 0..n {
            x = rk4_step(&x, &uv, p, &wv, h);
        }
        self.x_hat = State::from_vector(&x);
        self.p = psd_projection(&(f * self.p * f.transpose() + self.q_proc));
        if !self.x_hat.is_finite() {
            return Err(Error::Domain("estimate became non-finite".into()));
        }
        Ok(())
    }

    /// Fuses a full-state measurement. The heading innovation is wrapped and
    /// the corrected heading stays on the estimate's continuous branch.
    pub fn update(&mut self, z: &Measurement<f64>) -> Result<()> {
        if !z.state().is_finite() {
            return Err(Error::Domain("non-finite measurement".into()));
        }
        let r = state_residual(z.state(), &self.x_hat);
        let s = self.p + self.r_meas;
        let chol = s.cholesky().ok_or_else(|| {
            Error::Domain("innovation covariance is not positive definite".into())
        })?;
        // K = P S^-1, with S symmetric
        let k = chol.solve(&self.p).transpose();
        let mut x = self.x_hat.to_vector() + k * r;
        x[2] = unwrap_near(x[2], self.x_hat.theta);
        self.x_hat = State::from_vector(&x);
        let i_k = StateMatrix::identity() - k;
        self.p =
            psd_projection(&(i_k * self.p * i_k.transpose() + k * self.r_meas * k.transpose()));
        Ok(())
    }

    /// `e^T P^-1 e` for the error of `truth` against the estimate.
    pub fn nees(&self, truth: &State<f64>) -> Option<f64> {
        let e = state_residual(truth, &self.x_hat);
        let chol = self.p.cholesky()?;
        Some(e.dot(&chol.solve(&e)))
    }
}

/// Estimator log header: time, estimate, covariance diagonal.
pub const ESTIMATOR_CSV_HEADER: &str =
    "t,x,y,theta,xdot,ydot,thetadot,omega_rw,p_x,p_y,p_theta,p_xdot,p_ydot,p_thetadot,p_omega_rw";

pub fn estimator_log_csv(rows: &[(f64, State<f64>, [f64; STATE_DIM])]) -> String {
    let mut out = String::from(ESTIMATOR_CSV_HEADER);
    out.push('\n');
    for (t, x, pd) in rows {
        write!(out, "{t:.6}").unwrap();
        for v in x.to_array().iter().chain(pd) {
            write!(out, ",{v:.12e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_estimator_log(
    path: &Path,
    rows: &[(f64, State<f64>, [f64; STATE_DIM])],
) -> Result<()> {
    std::fs::write(path, estimator_log_csv(rows)).map_err(|e| Error::io(path, e))
}
