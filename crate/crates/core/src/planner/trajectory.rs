//! Certified knot trajectories with Hermite interpolation and CSV I/O.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector2;

use super::collocation::{hermite_interval, max_defect};
use super::solver::SolveDiagnostics;
use crate::error::{Error, Result};
use crate::model::{dynamics, Control, PlatformParams, State, CONTROL_DIM, STATE_DIM};

pub const CSV_HEADER: &str = "t,x,y,theta,xdot,ydot,thetadot,omega_rw,tau,f0,f1,f2,f3,f4,f5,f6,f7";

/// Knot trajectory whose collocation defects were verified on construction.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State<f64>>,
    controls: Vec<Control<f64>>,
    mid_states: Vec<State<f64>>,
    mid_controls: Vec<Control<f64>>,
    params: PlatformParams<f64>,
    max_defect: f64,
    diagnostics: Option<SolveDiagnostics>,
}

impl Trajectory {
    /// Checks the time grid and the Hermite-Simpson defects, caching the
    /// interval midpoints.
    pub fn new(
        times: Vec<f64>,
        states: Vec<State<f64>>,
        controls: Vec<Control<f64>>,
        params: &PlatformParams<f64>,
        feasibility_tol: f64,
    ) -> Result<Self> {
        let n = times.len();
        if states.len() != n || controls.len() != n {
            return Err(Error::Dimension(format!(
                "{n} times, {} states, {} controls",
                states.len(),
                controls.len()
            )));
        }
        if n < 2 {
            return Err(Error::Dimension(
                "a trajectory needs at least two knots".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite())
            || states.iter().any(|s| !s.is_finite())
            || controls.iter().any(|u| !u.is_finite())
        {
            return Err(Error::Domain("non-finite trajectory entry".into()));
        }
        let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        if dt <= 0.0 {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        let span = times[0].abs().max(times[n - 1].abs()).max(1.0);
        for (k, &t) in times.iter().enumerate() {
            if (t - (times[0] + k as f64 * dt)).abs() > 1e-9 * span {
                return Err(Error::Domain(format!(
                    "knot {k} is off the uniform time grid"
                )));
            }
        }
        let mut defects = Vec::with_capacity(n - 1);
        let mut mid_states = Vec::with_capacity(n - 1);
        let mut mid_controls = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let d = hermite_interval(
                &states[k].to_vector(),
                &states[k + 1].to_vector(),
                &controls[k].to_vector(),
                &controls[k + 1].to_vector(),
                params,
                dt,
            );
            defects.push(d.defect);
            mid_states.push(State::from_vector(&d.mid_state));
            mid_controls.push(Control::from_vector(&d.mid_control));
        }
        let max_defect = max_defect(&defects);
        if !(max_defect <= feasibility_tol) {
            return Err(Error::Domain(format!(
                "collocation defect {max_defect:.3e} exceeds tolerance {feasibility_tol:.3e}"
            )));
        }
        Ok(Self {
            times,
            states,
            controls,
            mid_states,
            mid_controls,
            params: *params,
            max_defect,
            diagnostics: None,
        })
    }

    pub(crate) fn with_diagnostics(mut self, d: SolveDiagnostics) -> Self {
        self.diagnostics = Some(d);
        self
    }

    /// Same trajectory with every time shifted so that it starts at `t0`.
    pub fn starting_at(mut self, t0: f64) -> Self {
        let dt = self.dt();
        let n = self.times.len();
        self.times = (0..n).map(|k| t0 + k as f64 * dt).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State<f64>] {
        &self.states
    }

    pub fn controls(&self) -> &[Control<f64>] {
        &self.controls
    }

    pub fn mid_states(&self) -> &[State<f64>] {
        &self.mid_states
    }

    pub fn mid_controls(&self) -> &[Control<f64>] {
        &self.mid_controls
    }

    pub fn params(&self) -> &PlatformParams<f64> {
        &self.params
    }

    pub fn max_defect(&self) -> f64 {
        self.max_defect
    }

    pub fn diagnostics(&self) -> Option<&SolveDiagnostics> {
        self.diagnostics.as_ref()
    }

    pub fn dt(&self) -> f64 {
        (self.end_time() - self.start_time()) / (self.len() - 1) as f64
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// `sum_k u_k^T diag(weights) u_k` over all knots.
    pub fn cost(&self, weights: &[f64; CONTROL_DIM]) -> f64 {
        self.controls
            .iter()
            .map(|u| {
                u.to_array()
                    .iter()
                    .zip(weights)
                    .map(|(v, r)| r * v * v)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Cubic Hermite state and linear control at time `t`, clamped to the
    /// trajectory's time span. Knot times return knot values exactly.
    pub fn sample(&self, t: f64) -> (State<f64>, Control<f64>) {
        let n = self.len();
        if t <= self.times[0] {
            return (self.states[0], self.controls[0]);
        }
        if t >= self.times[n - 1] {
            return (self.states[n - 1], self.controls[n - 1]);
        }
        let dt = self.dt();
        let k = (((t - self.times[0]) / dt).floor() as usize).min(n - 2);
        let s = ((t - self.times[k]) / dt).clamp(0.0, 1.0);
        if s == 0.0 {
            return (self.states[k], self.controls[k]);
        }
        let w = Vector2::zeros();
        let (x0, x1) = (self.states[k].to_vector(), self.states[k + 1].to_vector());
        let (u0, u1) = (
            self.controls[k].to_vector(),
            self.controls[k + 1].to_vector(),
        );
        let f0 = dynamics(&x0, &u0, &self.params, &w);
        let f1 = dynamics(&x1, &u1, &self.params, &w);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let x = x0 * h00 + f0 * (h10 * dt) + x1 * h01 + f1 * (h11 * dt);
        let u = u0 * (1.0 - s) + u1 * s;
        (State::from_vector(&x), Control::from_vector(&u))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 18 * 24);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for ((t, s), u) in self.times.iter().zip(&self.states).zip(&self.controls) {
            write!(out, "{t:.16e}").unwrap();
            for v in s.to_array().iter().chain(u.to_array().iter()) {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses and re-certifies a trajectory written by [`Trajectory::to_csv`].
    pub fn from_csv(
        text: &str,
        params: &PlatformParams<f64>,
        feasibility_tol: f64,
    ) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty trajectory file".into()))?;
        if header.trim() != CSV_HEADER {
            return Err(Error::Format(format!(
                "unexpected trajectory header `{header}`"
            )));
        }
        let (mut times, mut states, mut controls) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("trajectory row {}: {e}", i + 2)))?;
            if vals.len() != 1 + STATE_DIM + CONTROL_DIM {
                return Err(Error::Format(format!(
                    "trajectory row {} has {} fields",
                    i + 2,
                    vals.len()
                )));
            }
            times.push(vals[0]);
            let mut s = [0.0; STATE_DIM];
            s.copy_from_slice(&vals[1..1 + STATE_DIM]);
            let mut u = [0.0; CONTROL_DIM];
            u.copy_from_slice(&vals[1 + STATE_DIM..]);
            states.push(State::from_array(s));
            controls.push(Control::from_array(u));
        }
        Self::new(times, states, controls, params, feasibility_tol)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(
        path: &Path,
        params: &PlatformParams<f64>,
        feasibility_tol: f64,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, params, feasibility_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc() -> Trajectory {
        let p = PlatformParams::default();
        let n = 9;
        let dt = 0.5;
        let mut u = Control::zero();
        u.thrust[3] = 2.0;
        u.thrust[6] = 2.0;
        let a = 4.0 / p.mass_total;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let states = times
            .iter()
            .map(|&t| State {
                x: 0.5 * a * t * t + 0.1 * t,
                x_dot: a * t + 0.1,
                y: 0.3,
                ..State::zero()
            })
            .collect();
        Trajectory::new(times, states, vec![u; n], &p, 1e-9).unwrap()
    }

    #[test]
    fn certifies_exact_arc() {
        let t = arc();
        assert!(t.max_defect() <= 1e-12);
        assert_eq!(t.mid_states().len(), 8);
        assert!((t.dt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_infeasible_knots() {
        let t = arc();
        let mut states = t.states().to_vec();
        states[3].x += 1e-3;
        let err = Trajectory::new(
            t.times().to_vec(),
            states,
            t.controls().to_vec(),
            t.params(),
            1e-6,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_nonuniform_grid() {
        let t = arc();
        let mut times = t.times().to_vec();
        times[2] += 0.01;
        assert!(Trajectory::new(
            times,
            t.states().to_vec(),
            t.controls().to_vec(),
            t.params(),
            1.0
        )
        .is_err());
    }

    #[test]
    fn sampling_hits_knots_and_follows_the_arc() {
        let t = arc();
        for k in 0..t.len() {
            let (s, u) = t.sample(t.times()[k]);
            assert_eq!(s, t.states()[k]);
            assert_eq!(u, t.controls()[k]);
        }
        // the cubic Hermite interpolant reproduces the quadratic arc
        let a = 4.0 / t.params().mass_total;
        let (s, _) = t.sample(1.3);
        assert!((s.x - (0.5 * a * 1.69 + 0.13)).abs() < 1e-14);
        assert!((s.x_dot - (a * 1.3 + 0.1)).abs() < 1e-14);
        // midpoint cache agrees with the interpolant
        let (m, _) = t.sample(0.25);
        assert!((m.x - t.mid_states()[0].x).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let t = arc().starting_at(1.0 / 3.0);
        let text = t.to_csv();
        assert!(text.starts_with(CSV_HEADER));
        let back = Trajectory::from_csv(&text, t.params(), 1e-9).unwrap();
        for k in 0..t.len() {
            assert_eq!(back.times()[k].to_bits(), t.times()[k].to_bits());
            for (a, b) in back.states()[k]
                .to_array()
                .iter()
                .zip(t.states()[k].to_array())
            {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in back.controls()[k]
                .to_array()
                .iter()
                .zip(t.controls()[k].to_array())
            {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Trajectory::from_csv("t,x\n0,0\n", &PlatformParams::default(), 1.0).is_err());
    }
}
