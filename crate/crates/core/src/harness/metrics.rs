//! Tracking-error and actuation statistics of a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::State;
use crate::scalar::wrap_angle;
use crate::tracker::Reference;

use super::log::RunLog;

/// Mean absolute errors over the ticks of one reference segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub segment: usize,
    pub samples: usize,
    pub e_x_m: f64,
    pub e_y_m: f64,
    pub e_xy_m: f64,
    pub e_theta_deg: f64,
}

/// Whole-run summary. Errors are means over control ticks of the truth
/// against the time-indexed reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub e_x_m: f64,
    pub e_y_m: f64,
    pub e_xy_m: f64,
    pub e_theta_deg: f64,
    /// Valve openings over all executed ticks.
    pub firings_total: u64,
    #[serde(rename = "impulse_Ns")]
    pub impulse_ns: f64,
    /// Fraction of ticks during which the wheel speed limit cut the torque.
    pub rw_saturated_fraction: f64,
    pub segments: Vec<SegmentMetrics>,
}

#[derive(Default, Clone, Copy)]
struct Sums {
    n: usize,
    ex: f64,
    ey: f64,
    exy: f64,
    eth: f64,
}

impl Sums {
    fn add(&mut self, truth: &State<f64>, desired: &State<f64>) {
        let (dx, dy) = (truth.x - desired.x, truth.y - desired.y);
        self.n += 1;
        self.ex += dx.abs();
        self.ey += dy.abs();
        self.exy += dx.hypot(dy);
        self.eth += wrap_angle(truth.theta - desired.theta).abs().to_degrees();
    }

    fn means(&self) -> (f64, f64, f64, f64) {
        let n = self.n as f64;
        (self.ex / n, self.ey / n, self.exy / n, self.eth / n)
    }
}

/// Metrics of `log` against `desired[k]` at tick `k`.
pub fn metrics_against(log: &RunLog, desired: &[State<f64>]) -> Result<RunMetrics> {
    if log.is_empty() {
        return Err(Error::Domain("empty run log".into()));
    }
    if desired.len() != log.len() {
        return Err(Error::Dimension(format!(
            "{} reference samples for {} log ticks",
            desired.len(),
            log.len()
        )));
    }
    let mut total = Sums::default();
    let mut per: Vec<(usize, Sums)> = Vec::new();
    for (t, d) in log.ticks.iter().zip(desired) {
        total.add(&t.truth, d);
        match per.iter_mut().find(|(s, _)| *s == t.segment) {
            Some((_, sums)) => sums.add(&t.truth, d),
            None => {
                let mut sums = Sums::default();
                sums.add(&t.truth, d);
                per.push((t.segment, sums));
            }
        }
    }
    per.sort_by_key(|(s, _)| *s);

    // the command logged at the final tick is never executed
    let executed = &log.ticks[..log.len() - 1];
    let dt = if log.len() > 1 {
        log.ticks[1].time - log.ticks[0].time
    } else {
        0.0
    };
    let mut firings = 0u64;
    let mut impulse = 0.0;
    for t in executed {
        for &f in &t.applied.thrust {
            if f > 0.0 {
                firings += 1;
                impulse += f * dt;
            }
        }
    }
    let saturated = log.ticks.iter().filter(|t| t.rw_saturated).count();

    let (e_x_m, e_y_m, e_xy_m, e_theta_deg) = total.means();
    Ok(RunMetrics {
        e_x_m,
        e_y_m,
        e_xy_m,
        e_theta_deg,
        firings_total: firings,
        impulse_ns: impulse,
        rw_saturated_fraction: saturated as f64 / log.len() as f64,
        segments: per
            .into_iter()
            .map(|(segment, s)| {
                let (e_x_m, e_y_m, e_xy_m, e_theta_deg) = s.means();
                SegmentMetrics {
                    segment,
                    samples: s.n,
                    e_x_m,
                    e_y_m,
                    e_xy_m,
                    e_theta_deg,
                }
            })
            .collect(),
    })
}

/// Metrics against `reference` sampled at the log timestamps.
pub fn compute_errors(log: &RunLog, reference: &Reference) -> Result<RunMetrics> {
    let desired: Vec<State<f64>> = log
        .ticks
        .iter()
        .map(|t| reference.sample(t.time).0)
        .collect();
    metrics_against(log, &desired)
}

/// Metrics against the reference columns stored in the log itself.
pub fn metrics_from_log(log: &RunLog) -> Result<RunMetrics> {
    let desired: Vec<State<f64>> = log.ticks.iter().map(|t| t.reference).collect();
    metrics_against(log, &desired)
}

impl RunMetrics {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::log::Tick;
    use crate::model::Control;
    use approx::assert_relative_eq;

    fn log_of(truth: &[State<f64>], reference: &[State<f64>]) -> RunLog {
        RunLog {
            ticks: truth
                .iter()
                .zip(reference)
                .enumerate()
                .map(|(k, (t, r))| Tick {
                    time: 0.1 * k as f64,
                    segment: k / 2,
                    truth: *t,
                    reference: *r,
                    measurement: *t,
                    estimate: *t,
                    p_diag: [0.0; 7],
                    nees: 0.0,
                    command: Control::zero(),
                    applied: Control::zero(),
                    disturbance: [0.0; 2],
                    rw_saturated: false,
                })
                .collect(),
        }
    }

    #[test]
    fn identical_paths_have_zero_error() {
        let r: Vec<_> = (0..5).map(|k| State::at_pose(k as f64, 0.5, 3.0)).collect();
        let m = metrics_from_log(&log_of(&r, &r)).unwrap();
        assert_eq!(
            (m.e_x_m, m.e_y_m, m.e_xy_m, m.e_theta_deg),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(m.segments.len(), 3);
        assert_eq!(m.segments[2].samples, 1);
    }

    #[test]
    fn constant_offset_is_a_3_4_5_triangle() {
        let r: Vec<_> = (0..4).map(|k| State::at_pose(k as f64, 0.0, 0.0)).collect();
        let t: Vec<_> = r
            .iter()
            .map(|s| State::at_pose(s.x + 0.03, s.y - 0.04, 0.0))
            .collect();
        let m = metrics_from_log(&log_of(&t, &r)).unwrap();
        assert_relative_eq!(m.e_x_m, 0.03, epsilon = 1e-12);
        assert_relative_eq!(m.e_y_m, 0.04, epsilon = 1e-12);
        assert_relative_eq!(m.e_xy_m, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn heading_error_is_an_absolute_wrapped_mean() {
        let r: Vec<_> = (0..6)
            .map(|_| State::at_pose(0.0, 0.0, std::f64::consts::PI - 0.01))
            .collect();
        let t: Vec<_> = (0..6)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                State::at_pose(0.0, 0.0, r[0].theta + sign * 5f64.to_radians())
            })
            .collect();
        let m = metrics_from_log(&log_of(&t, &r)).unwrap();
        assert_relative_eq!(m.e_theta_deg, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn actuation_counts_skip_the_final_tick() {
        let r: Vec<_> = (0..3).map(|_| State::zero()).collect();
        let mut log = log_of(&r, &r);
        for t in &mut log.ticks {
            t.applied.thrust[0] = 10.0;
            t.applied.thrust[5] = 10.0;
        }
        log.ticks[1].rw_saturated = true;
        let m = metrics_from_log(&log).unwrap();
        assert_eq!(m.firings_total, 4);
        assert_relative_eq!(m.impulse_ns, 4.0, epsilon = 1e-12);
        assert_relative_eq!(m.rw_saturated_fraction, 1.0 / 3.0);
    }

    #[test]
    fn empty_log_rejected() {
        assert!(metrics_from_log(&RunLog::default()).is_err());
    }

    #[test]
    fn json_uses_the_stable_keys() {
        let r = vec![State::zero(); 2];
        let json = metrics_from_log(&log_of(&r, &r)).unwrap().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "e_theta_deg",
                "e_x_m",
                "e_xy_m",
                "e_y_m",
                "firings_total",
                "impulse_Ns",
                "rw_saturated_fraction",
                "segments"
            ]
        );
    }
}
