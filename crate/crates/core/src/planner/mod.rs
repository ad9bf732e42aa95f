//! Minimum-actuation trajectory planning with relaxed (continuous) thrust.
//!
//! A segment between two boundary states is transcribed by Hermite-Simpson
//! collocation ([`collocation`]) and solved by a bound-constrained
//! augmented-Lagrangian method ([`solver`]). Returned trajectories are
//! re-certified against the collocation defects on construction.

pub mod banded;
pub mod collocation;
pub mod solver;
pub mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Control, PlatformParams, State, CONTROL_DIM, STATE_DIM};
use crate::scalar::{unwrap_near, wrap_angle};

pub use collocation::{hermite_defects, max_defect, transcribe, CollocationProblem, Layout};
pub use solver::{SolveDiagnostics, SolveStatus, SolverOptions};
pub use trajectory::Trajectory;

/// Boundary states of one segment and its duration [s].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub x_init: State<f64>,
    pub x_final: State<f64>,
    pub duration: f64,
}

impl BoundaryConditions {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Domain(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        if !self.x_init.is_finite() || !self.x_final.is_finite() {
            return Err(Error::Domain("non-finite boundary state".into()));
        }
        Ok(())
    }
}

/// Transcription and solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Knot count per segment.
    pub knots: usize,
    /// State box `[x, y, theta, xdot, ydot, thetadot, omega_rw]`. The wheel
    /// speed bound is further limited to the platform's `rw_speed_max`.
    pub state_lower: [f64; STATE_DIM],
    pub state_upper: [f64; STATE_DIM],
    /// Control box `[tau, f0..f7]`, intersected with `[-tau_max, tau_max]`
    /// and `[0, thrust_max]`.
    pub control_lower: [f64; CONTROL_DIM],
    pub control_upper: [f64; CONTROL_DIM],
    /// Diagonal of the actuation weight `R`.
    pub actuation_weight: [f64; CONTROL_DIM],
    /// Bound on the collocation defect inf-norm.
    pub feasibility_tol: f64,
    /// Bound on the projected Lagrangian gradient inf-norm.
    pub stationarity_tol: f64,
    /// Augmented-Lagrangian outer iterations.
    pub max_iterations: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            knots: 41,
            state_lower: [-100.0, -100.0, -1.0e3, -1.0, -1.0, -1.0, -1.0e4],
            state_upper: [100.0, 100.0, 1.0e3, 1.0, 1.0, 1.0, 1.0e4],
            control_lower: [-1.0e3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            control_upper: [1.0e3; CONTROL_DIM],
            actuation_weight: [0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            feasibility_tol: 1e-6,
            stationarity_tol: 1e-4,
            max_iterations: 50,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.knots < 3 {
            return Err(Error::Config(format!(
                "planner.knots must be >= 3, got {}",
                self.knots
            )));
        }
        let ordered = |lo: &[f64], hi: &[f64]| {
            lo.iter()
                .zip(hi)
                .all(|(l, u)| l <= u && !l.is_nan() && !u.is_nan())
        };
        if !ordered(&self.state_lower, &self.state_upper) {
            return Err(Error::Config("planner state bounds are not ordered".into()));
        }
        if !ordered(&self.control_lower, &self.control_upper) {
            return Err(Error::Config(
                "planner control bounds are not ordered".into(),
            ));
        }
        let r = &self.actuation_weight;
        if !(r[0] >= 0.0 && r[0].is_finite()) || r[1..].iter().any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::Config(
                "actuation_weight needs tau weight >= 0 and thrust weights > 0".into(),
            ));
        }
        if !(self.feasibility_tol > 0.0 && self.stationarity_tol > 0.0) {
            return Err(Error::Config("planner tolerances must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("planner.max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            feasibility_tol: self.feasibility_tol,
            stationarity_tol: self.stationarity_tol,
            max_outer_iterations: self.max_iterations,
            ..SolverOptions::default()
        }
    }
}

/// Straight-line initial guess: states interpolated linearly (heading along
/// the shorter arc), thrusts at a tenth of `thrust_max`, wheel torque zero.
pub fn initial_guess(
    bc: &BoundaryConditions,
    cfg: &PlannerConfig,
    p: &PlatformParams<f64>,
) -> (Vec<State<f64>>, Vec<Control<f64>>) {
    let n = cfg.knots;
    let a = bc.x_init.to_array();
    let b = bc.x_final.to_array();
    let sweep = wrap_angle(b[2] - a[2]);
    let states = (0..n)
        .map(|k| {
            let s = k as f64 / (n - 1) as f64;
            let mut v = [0.0; STATE_DIM];
            for i in 0..STATE_DIM {
                v[i] = a[i] + s * (b[i] - a[i]);
            }
            v[2] = a[2] + s * sweep;
            State::from_array(v)
        })
        .collect();
    let mut u = Control::zero();
    u.thrust = [0.1 * p.thrust_max; 8];
    (states, vec![u; n])
}

/// Best iterate of a solve that did not meet its tolerances.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub reason: String,
    pub diagnostics: SolveDiagnostics,
    pub states: Vec<State<f64>>,
    pub controls: Vec<Control<f64>>,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = &self.diagnostics;
        write!(
            f,
            "{} (status {:?}, {} outer / {} inner iterations, violation {:.3e}, stationarity {:.3e})",
            self.reason, d.status, d.outer_iterations, d.inner_iterations, d.constraint_violation, d.stationarity
        )
    }
}

impl std::error::Error for SolveFailure {}

/// Solves a transcribed problem from the given guess and certifies the result.
pub fn solve(
    problem: &CollocationProblem,
    guess: (&[State<f64>], &[Control<f64>]),
    cfg: &PlannerConfig,
) -> std::result::Result<Trajectory, SolveFailure> {
    let layout = problem.layout;
    let z0 = layout.pack(guess.0, guess.1);
    let res = solver::solve_augmented_lagrangian(problem, &z0, &cfg.solver_options());
    let (states, controls) = layout.unpack(&res.z);
    let fail = |reason: String| SolveFailure {
        reason,
        diagnostics: res.diagnostics.clone(),
        states: states.clone(),
        controls: controls.clone(),
    };
    if res.diagnostics.status != SolveStatus::Converged {
        return Err(fail(format!(
            "solver stopped with {:?}",
            res.diagnostics.status
        )));
    }
    let residual = problem.boundary_residual(&states);
    if residual > 1e-8 {
        return Err(fail(format!("boundary residual {residual:.3e}")));
    }
    let times = (0..layout.knots).map(|k| k as f64 * problem.dt).collect();
    Trajectory::new(
        times,
        states.clone(),
        controls.clone(),
        &problem.params,
        cfg.feasibility_tol,
    )
    .map(|t| t.with_diagnostics(res.diagnostics.clone()))
    .map_err(|e| fail(e.to_string()))
}

/// Transcribes, guesses and solves one segment.
pub fn plan_segment(
    bc: &BoundaryConditions,
    cfg: &PlannerConfig,
    p: &PlatformParams<f64>,
) -> Result<std::result::Result<Trajectory, SolveFailure>> {
    let problem = transcribe(bc, cfg, p)?;
    let (xs, us) = initial_guess(bc, cfg, p);
    Ok(solve(&problem, (&xs, &us), cfg))
}

/// A state to pass through at a given time [s].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub time: f64,
    pub state: State<f64>,
}

/// Plans one trajectory per consecutive waypoint pair. Headings are first
/// unwrapped along the sequence; segment `k` ends exactly where segment
/// `k + 1` starts. Segments are solved on separate threads.
pub fn plan_waypoint_sequence(
    waypoints: &[Waypoint],
    cfg: &PlannerConfig,
    p: &PlatformParams<f64>,
) -> Result<Vec<Trajectory>> {
    if waypoints.len() < 2 {
        return Err(Error::Domain("need at least two waypoints".into()));
    }
    let mut wps = waypoints.to_vec();
    for k in 1..wps.len() {
        let prev = wps[k - 1].state.theta;
        if (wps[k].state.theta - prev).abs() > std::f64::consts::PI {
            wps[k].state.theta = unwrap_near(wps[k].state.theta, prev);
        }
    }
    let bcs = wps
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let bc = BoundaryConditions {
                x_init: w[0].state,
                x_final: w[1].state,
                duration: w[1].time - w[0].time,
            };
            bc.validate().map_err(|e| Error::PlannerNonConvergence {
                segment: k,
                reason: e.to_string(),
            })?;
            Ok(bc)
        })
        .collect::<Result<Vec<_>>>()?;

    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(bcs.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<Result<Trajectory>>> = (0..bcs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if k >= bcs.len() {
                            break;
                        }
                        let out = match plan_segment(&bcs[k], cfg, p) {
                            Ok(Ok(t)) => Ok(t.starting_at(wps[k].time)),
                            Ok(Err(f)) => Err(Error::PlannerNonConvergence {
                                segment: k,
                                reason: f.to_string(),
                            }),
                            Err(e) => Err(Error::PlannerNonConvergence {
                                segment: k,
                                reason: e.to_string(),
                            }),
                        };
                        done.push((k, out));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (k, out) in h.join().expect("planner worker panicked") {
                results[k] = Some(out);
            }
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("segment not planned"))
        .collect()
}
