//! Time-varying LQR tracking of a planned reference.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    jacobians, Control, InputMatrix, PlatformParams, State, StateMatrix, CONTROL_DIM, STATE_DIM,
};
use crate::planner::Trajectory;
use crate::scalar::wrap_angle;

pub type GainMatrix = SMatrix<f64, CONTROL_DIM, STATE_DIM>;

/// LQR weights (diagonals) and control period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// State weight diagonal.
    pub q: [f64; STATE_DIM],
    /// Control weight diagonal.
    pub r_fb: [f64; CONTROL_DIM],
    /// Terminal state weight diagonal.
    pub q_f: [f64; STATE_DIM],
    /// Control period [s].
    pub dt_ctrl: f64,
}

impl Default for TrackerConfig {
    /// Stiff enough in position that the floor-slope offset stays a small
    /// multiple of the flat-floor error; the velocity weights keep a 5 cm
    /// offset decaying monotonically despite thrust clamping.
    fn default() -> Self {
        let q = [2e4, 2e4, 1e3, 1e3, 1e3, 10.0, 1e-4];
        Self {
            q,
            r_fb: [1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
            q_f: q.map(|v| 10.0 * v),
            dt_ctrl: 0.1,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self
            .q
            .iter()
            .chain(&self.q_f)
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::Config(
                "tracker q and q_f entries must be finite and >= 0".into(),
            ));
        }
        if self.r_fb.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(
                "tracker r_fb entries must be finite and > 0".into(),
            ));
        }
        if !(self.dt_ctrl > 0.0 && self.dt_ctrl.is_finite()) {
            return Err(Error::Config("tracker dt_ctrl must be > 0".into()));
        }
        Ok(())
    }

    pub fn q_matrix(&self) -> StateMatrix<f64> {
        StateMatrix::from_diagonal(&SVector::from(self.q))
    }

    pub fn q_f_matrix(&self) -> StateMatrix<f64> {
        StateMatrix::from_diagonal(&SVector::from(self.q_f))
    }

    pub fn r_matrix(&self) -> SMatrix<f64, CONTROL_DIM, CONTROL_DIM> {
        SMatrix::from_diagonal(&SVector::from(self.r_fb))
    }
}

/// Time-contiguous sequence of planned segments.
#[derive(Debug, Clone)]
pub struct Reference {
    segments: Vec<Trajectory>,
}

impl Reference {
    pub fn new(segments: Vec<Trajectory>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Domain("empty reference".into()));
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = w[1].start_time() - w[0].end_time();
            if gap.abs() > 1e-9 * w[0].end_time().abs().max(1.0) {
                return Err(Error::Domain(format!(
                    "gap of {gap:.3e} s after segment {k}"
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Trajectory] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].start_time()
    }

    pub fn end_time(&self) -> f64 {
        self.segments[self.segments.len() - 1].end_time()
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// Index of the segment active at `t` (the later one at a junction).
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .iter()
            .rposition(|s| s.start_time() <= t)
            .unwrap_or(0)
    }

    /// Nominal state and control at `t`, holding the end points outside the
    /// planned span.
    pub fn sample(&self, t: f64) -> (State<f64>, Control<f64>) {
        self.segments[self.segment_index(t)].sample(t)
    }
}

/// One step of the time-discretized linearization.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteStep {
    pub time: f64,
    pub a: StateMatrix<f64>,
    pub b: InputMatrix<f64>,
    pub x_nom: State<f64>,
    pub u_nom: Control<f64>,
}

/// Zero-order-hold discretization by the series truncated after `dt^4`:
/// `Ad = sum_{i<=4} (A dt)^i / i!`, `Bd = sum_{i<=3} A^i dt^{i+1} / (i+1)! B`.
pub fn discretize<const N: usize, const M: usize>(
    a: &SMatrix<f64, N, N>,
    b: &SMatrix<f64, N, M>,
    dt: f64,
) -> (SMatrix<f64, N, N>, SMatrix<f64, N, M>) {
    let id = SMatrix::<f64, N, N>::identity();
    let a1 = a * dt;
    let a2 = a1 * a1;
    let a3 = a2 * a1;
    let a4 = a3 * a1;
    let ad = id + a1 + a2 / 2.0 + a3 / 6.0 + a4 / 24.0;
    let gamma = (id + a1 / 2.0 + a2 / 6.0 + a3 / 24.0) * dt;
    (ad, gamma * b)
}

/// Number of control ticks covering `duration`, counting both ends.
pub fn sample_count(duration: f64, dt_ctrl: f64) -> usize {
    (duration / dt_ctrl + 1e-9).floor() as usize + 1
}

/// Resamples the reference every `dt_ctrl` and discretizes the Jacobians at
/// each sample.
pub fn discretize_along(
    reference: &Reference,
    p: &PlatformParams<f64>,
    dt_ctrl: f64,
) -> Result<Vec<DiscreteStep>> {
    if !(dt_ctrl > 0.0) {
        return Err(Error::Domain("dt_ctrl must be > 0".into()));
    }
    let m = sample_count(reference.duration(), dt_ctrl);
    let t0 = reference.start_time();
    Ok((0..m)
        .map(|k| {
            let time = t0 + k as f64 * dt_ctrl;
            let (x_nom, u_nom) = reference.sample(time);
            let (a, b) = jacobians(&x_nom.to_vector(), &u_nom.to_vector(), p);
            let (a, b) = discretize(&a, &b, dt_ctrl);
            DiscreteStep {
                time,
                a,
                b,
                x_nom,
                u_nom,
            }
        })
        .collect())
}

/// Backward Riccati recursion over `steps`, starting from `S_M = q_f`.
/// Returns the gains `K_0..K_{M-1}` and cost-to-go matrices `S_0..S_M`.
#[allow(clippy::type_complexity)]
pub fn riccati_recursion<const N: usize, const M: usize>(
    steps: &[(SMatrix<f64, N, N>, SMatrix<f64, N, M>)],
    q: &SMatrix<f64, N, N>,
    r: &SMatrix<f64, M, M>,
    q_f: &SMatrix<f64, N, N>,
) -> Result<(Vec<SMatrix<f64, M, N>>, Vec<SMatrix<f64, N, N>>)> {
    let mut s = *q_f;
    let mut gains = vec![SMatrix::<f64, M, N>::zeros(); steps.len()];
    let mut costs = vec![SMatrix::<f64, N, N>::zeros(); steps.len() + 1];
    costs[steps.len()] = s;
    for (k, (a, b)) in steps.iter().enumerate().rev() {
        let bts = b.transpose() * s;
        let gram = r + bts * b;
        let chol = gram.cholesky().ok_or_else(|| {
            Error::Domain(format!("R + B^T S B not positive definite at step {k}"))
        })?;
        let gain = chol.solve(&(bts * a));
        let next = q + a.transpose() * s * a - a.transpose() * s * b * gain;
        s = (next + next.transpose()) * 0.5;
        gains[k] = gain;
        costs[k] = s;
    }
    Ok((gains, costs))
}

/// Precomputed feedback gains along a reference.
#[derive(Debug, Clone)]
pub struct GainSchedule {
    pub times: Vec<f64>,
    pub gains: Vec<GainMatrix>,
    pub x_nom: Vec<State<f64>>,
    pub u_nom: Vec<Control<f64>>,
    pub dt_ctrl: f64,
}

/// TVLQR gains for a discretized reference.
pub fn riccati_backward(seq: &[DiscreteStep], cfg: &TrackerConfig) -> Result<GainSchedule> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::Domain("empty discretized sequence".into()));
    }
    let steps: Vec<_> = seq.iter().map(|s| (s.a, s.b)).collect();
    let (gains, _) =
        riccati_recursion(&steps, &cfg.q_matrix(), &cfg.r_matrix(), &cfg.q_f_matrix())?;
    if gains.iter().any(|k| k.iter().any(|v| !v.is_finite())) {
        return Err(Error::Domain("non-finite feedback gain".into()));
    }
    Ok(GainSchedule {
        times: seq.iter().map(|s| s.time).collect(),
        gains,
        x_nom: seq.iter().map(|s| s.x_nom).collect(),
        u_nom: seq.iter().map(|s| s.u_nom).collect(),
        dt_ctrl: cfg.dt_ctrl,
    })
}

/// Discretizes and runs the Riccati pass in one go.
pub fn build_schedule(
    reference: &Reference,
    p: &PlatformParams<f64>,
    cfg: &TrackerConfig,
) -> Result<GainSchedule> {
    cfg.validate()?;
    riccati_backward(&discretize_along(reference, p, cfg.dt_ctrl)?, cfg)
}

/// State error `x - x_ref` with the heading residual wrapped to (-pi, pi].
pub fn state_error(x: &State<f64>, x_ref: &State<f64>) -> SVector<f64, STATE_DIM> {
    let mut e = x.to_vector() - x_ref.to_vector();
    e[2] = wrap_angle(x.theta - x_ref.theta);
    e
}

impl GainSchedule {
    /// Schedule index in effect at `t` (the last one past the end).
    pub fn index(&self, t: f64) -> usize {
        let k = ((t - self.times[0]) / self.dt_ctrl + 1e-9).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.times.len() - 1)
        }
    }

    /// `clamp(u_nom - K (x_est - x_nom))` at `t`.
    pub fn feedback(&self, t: f64, x_est: &State<f64>, p: &PlatformParams<f64>) -> Control<f64> {
        let k = self.index(t);
        let e = state_error(x_est, &self.x_nom[k]);
        let u = self.u_nom[k].to_vector() - self.gains[k] * e;
        let mut out = Control::from_vector(&u);
        out.tau = out.tau.clamp(-p.rw_torque_max, p.rw_torque_max);
        for f in &mut out.thrust {
            *f = f.clamp(0.0, p.thrust_max);
        }
        out
    }

    /// `t` followed by the row-major entries of each gain.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..CONTROL_DIM {
            for j in 0..STATE_DIM {
                write!(out, ",k{i}{j}").unwrap();
            }
        }
        out.push('\n');
        for (t, k) in self.times.iter().zip(&self.gains) {
            write!(out, "{t:.6}").unwrap();
            for i in 0..CONTROL_DIM {
                for j in 0..STATE_DIM {
                    write!(out, ",{:.9e}", k[(i, j)]).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Free function form of [`GainSchedule::feedback`].
pub fn feedback(
    gs: &GainSchedule,
    t: f64,
    x_est: &State<f64>,
    p: &PlatformParams<f64>,
) -> Control<f64> {
    gs.feedback(t, x_est, p)
}
