//! Closed-loop runner: truth integration at `dt_sim`, sensing, estimation,
//! feedback and modulation at `dt_ctrl`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actuation::{rw_speed_saturated, saturate_rw, ModulatorState};
use crate::environment::{apply_sensor_noise, HeightField};
use crate::error::{Error, Result};
use crate::estimator::EstimatorState;
use crate::model::{integrate_step, Control, State};
use crate::planner::{plan_waypoint_sequence, Trajectory};
use crate::tracker::{build_schedule, sample_count, GainSchedule, Reference};

use super::config::ScenarioConfig;
use super::log::{RunLog, Tick};
use super::metrics::{compute_errors, RunMetrics};
use super::scenario::scenario_waypoints;

/// Plans every segment of the configured scenario.
pub fn plan_scenario(cfg: &ScenarioConfig, base: &Path) -> Result<Vec<Trajectory>> {
    let wps = scenario_waypoints(&cfg.scenario, base)?;
    plan_waypoint_sequence(&wps, &cfg.planner, &cfg.platform)
}

/// Everything a finished (or aborted) run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub log: RunLog,
    pub reference: Reference,
    pub schedule: GainSchedule,
    /// `None` when the run diverged.
    pub metrics: Option<RunMetrics>,
    /// Set when the truth state became non-finite; the log ends there.
    pub failure: Option<Error>,
}

/// Plans, builds the gain schedule and runs the closed loop.
pub fn run_scenario(cfg: &ScenarioConfig, base: &Path) -> Result<RunOutcome> {
    cfg.validate(base)?;
    let segments = plan_scenario(cfg, base)?;
    track_reference(cfg, base, Reference::new(segments)?)
}

/// Closed loop along an already planned reference.
pub fn track_reference(
    cfg: &ScenarioConfig,
    base: &Path,
    reference: Reference,
) -> Result<RunOutcome> {
    let floor = cfg.floor.load(base)?;
    let schedule = build_schedule(&reference, &cfg.platform, &cfg.tracker)?;
    let (log, failure) = simulate(cfg, &reference, &schedule, floor.as_ref())?;
    let metrics = match failure {
        None => Some(compute_errors(&log, &reference)?),
        Some(_) => None,
    };
    Ok(RunOutcome {
        log,
        reference,
        schedule,
        metrics,
        failure,
    })
}

/// One control period of truth motion: `substeps` RK4 steps with the floor
/// disturbance sampled at the current position and the wheel cut at its
/// speed limit. Returns whether the cut engaged.
fn advance_truth(
    truth: &mut State<f64>,
    applied: &Control<f64>,
    cfg: &ScenarioConfig,
    floor: Option<&HeightField<f64>>,
    substeps: usize,
) -> Result<bool> {
    let p = &cfg.platform;
    let mut cut = false;
    for _ in 0..substeps {
        let w = floor.map_or([0.0, 0.0], |f| {
            f.slope_disturbance(truth.x, truth.y, p.gravity).value
        });
        let tau = saturate_rw(applied.tau, truth.omega_rw, p);
        cut |= tau != applied.tau;
        let u = Control { tau, ..*applied };
        *truth = integrate_step(truth, &u, p, w, cfg.sim.dt_sim)?;
    }
    Ok(cut)
}

/// Runs the loop over the reference span. Each tick: measure, update the
/// estimate, compute the feedback, saturate and modulate, predict with the
/// applied command, then integrate the truth to the next tick.
pub fn simulate(
    cfg: &ScenarioConfig,
    reference: &Reference,
    schedule: &GainSchedule,
    floor: Option<&HeightField<f64>>,
) -> Result<(RunLog, Option<Error>)> {
    let p = &cfg.platform;
    let dt = cfg.tracker.dt_ctrl;
    let substeps = cfg.substeps()?;
    let ticks = sample_count(reference.duration(), dt);
    let t0 = reference.start_time();
    let max_slope = floor.map_or(0.0, |f| f.max_slope());
    let q = cfg.estimator.process_noise(max_slope, p.gravity, dt);
    let r = cfg.estimator.measurement_noise(&cfg.noise);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let mut truth = reference.sample(t0).0;
    let mut modulator = ModulatorState::<f64>::default();
    let mut est: Option<EstimatorState> = None;
    let mut log = RunLog::with_capacity(ticks);

    for k in 0..ticks {
        let t = t0 + k as f64 * dt;
        let diverged = Some(Error::Divergence { time: t });
        if !truth.is_finite() {
            return Ok((log, diverged));
        }
        let z = apply_sensor_noise(&truth, &cfg.noise, &mut rng);
        let filter = match est.as_mut() {
            Some(f) => {
                if f.update(&z).is_err() {
                    return Ok((log, diverged));
                }
                f
            }
            None => est.insert(EstimatorState::from_measurement(
                &z,
                &q,
                &r,
                cfg.estimator.max_step,
            )?),
        };
        let command = schedule.feedback(t, &filter.x_hat, p);
        let tau = saturate_rw(command.tau, filter.x_hat.omega_rw, p);
        let thrust = modulator.step(&command.thrust, p.thrust_max, dt);
        let applied = Control { tau, thrust };
        let mut row = Tick {
            time: t,
            segment: reference.segment_index(t),
            truth,
            reference: reference.sample(t).0,
            measurement: *z.state(),
            estimate: filter.x_hat,
            p_diag: std::array::from_fn(|i| filter.p[(i, i)]),
            nees: filter.nees(&truth).unwrap_or(f64::NAN),
            command,
            applied,
            disturbance: floor.map_or([0.0, 0.0], |f| {
                f.slope_disturbance(truth.x, truth.y, p.gravity).value
            }),
            rw_saturated: rw_speed_saturated(command.tau, filter.x_hat.omega_rw, p),
        };
        if k + 1 < ticks {
            let predicted = filter.predict(&applied, p, [0.0, 0.0], dt);
            match advance_truth(&mut truth, &applied, cfg, floor, substeps) {
                Ok(cut) if predicted.is_ok() => row.rw_saturated |= cut,
                _ => {
                    log.push(row);
                    return Ok((log, diverged));
                }
            }
        }
        log.push(row);
    }
    Ok((log, None))
}
