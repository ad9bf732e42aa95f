//! Waypoint sets for the built-in scenarios.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::State;
use crate::planner::Waypoint;

use super::config::ScenarioKind;

pub const WAYPOINT_CSV_HEADER: &str = "t,x,y,theta,xdot,ydot,thetadot,omega_rw";

/// `count` states evenly spaced in angle, starting on the +x side of
/// `center` and running counter-clockwise, each moving tangentially at
/// `speed` with the heading along the velocity.
pub fn build_circle_waypoints(
    radius: f64,
    count: usize,
    speed: f64,
    center: [f64; 2],
) -> Result<Vec<Waypoint>> {
    arc_waypoints(
        radius,
        count,
        speed,
        center,
        std::f64::consts::TAU / count as f64,
    )
}

fn arc_waypoints(
    radius: f64,
    count: usize,
    speed: f64,
    center: [f64; 2],
    step: f64,
) -> Result<Vec<Waypoint>> {
    if !(radius > 0.0 && radius.is_finite() && speed > 0.0 && speed.is_finite()) {
        return Err(Error::Domain(
            "radius and speed must be finite and > 0".into(),
        ));
    }
    if count < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 waypoints, got {count}"
        )));
    }
    let segment_time = radius * step / speed;
    Ok((0..count)
        .map(|k| {
            let phi = step * k as f64;
            let (s, c) = phi.sin_cos();
            Waypoint {
                time: segment_time * k as f64,
                state: State {
                    x: center[0] + radius * c,
                    y: center[1] + radius * s,
                    theta: phi + std::f64::consts::FRAC_PI_2,
                    x_dot: -speed * s,
                    y_dot: speed * c,
                    theta_dot: speed / radius,
                    omega_rw: 0.0,
                },
            }
        })
        .collect())
}

/// Waypoints the planner connects for `kind`. The circle is closed by
/// returning to its first state, one lap later in heading.
pub fn scenario_waypoints(kind: &ScenarioKind, base: &Path) -> Result<Vec<Waypoint>> {
    match kind {
        ScenarioKind::Circle {
            radius,
            waypoint_count,
            tangential_speed,
            center,
        } => {
            let mut wps =
                build_circle_waypoints(*radius, *waypoint_count, *tangential_speed, *center)?;
            let first = wps[0];
            let dt = wps[1].time - wps[0].time;
            let last_time = wps[wps.len() - 1].time;
            wps.push(Waypoint {
                time: last_time + dt,
                state: State {
                    theta: first.state.theta + std::f64::consts::TAU,
                    ..first.state
                },
            });
            Ok(wps)
        }
        ScenarioKind::SemiCircle {
            radius,
            waypoint_count,
            tangential_speed,
            center,
        } => {
            let n = (*waypoint_count).max(2);
            arc_waypoints(
                *radius,
                *waypoint_count,
                *tangential_speed,
                *center,
                std::f64::consts::PI / (n - 1) as f64,
            )
        }
        ScenarioKind::StraightLine {
            start,
            goal,
            duration,
        } => {
            if !(*duration > 0.0) {
                return Err(Error::Domain("duration must be > 0".into()));
            }
            Ok(vec![
                Waypoint {
                    time: 0.0,
                    state: State::at_pose(start[0], start[1], start[2]),
                },
                Waypoint {
                    time: *duration,
                    state: State::at_pose(goal[0], goal[1], goal[2]),
                },
            ])
        }
        ScenarioKind::Custom { path } => {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base.join(path)
            };
            let text = std::fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
            parse_waypoints(&text)
        }
    }
}

/// Reads a waypoint CSV; times must strictly increase.
pub fn parse_waypoints(text: &str) -> Result<Vec<Waypoint>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty waypoint file".into()))?;
    if header.trim() != WAYPOINT_CSV_HEADER {
        return Err(Error::Format(format!(
            "waypoint header must be `{WAYPOINT_CSV_HEADER}`"
        )));
    }
    let mut out: Vec<Waypoint> = Vec::new();
    for (i, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    Error::Format(format!("waypoint row {}: bad number `{}`", i + 1, t.trim()))
                })
            })
            .collect::<Result<_>>()?;
        if v.len() != 8 || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format(format!(
                "waypoint row {} needs 8 finite values",
                i + 1
            )));
        }
        if let Some(prev) = out.last() {
            if v[0] <= prev.time {
                return Err(Error::Format(format!(
                    "waypoint row {}: time does not increase",
                    i + 1
                )));
            }
        }
        out.push(Waypoint {
            time: v[0],
            state: State::from_array([v[1], v[2], v[3], v[4], v[5], v[6], v[7]]),
        });
    }
    if out.len() < 2 {
        return Err(Error::Format("need at least 2 waypoints".into()));
    }
    Ok(out)
}

pub fn waypoints_csv(wps: &[Waypoint]) -> String {
    let mut out = String::from(WAYPOINT_CSV_HEADER);
    out.push('\n');
    for w in wps {
        out.push_str(&w.time.to_string());
        for v in w.state.to_array() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_circle_segment_time() {
        let w = build_circle_waypoints(0.5, 40, 0.05, [0.0, 0.0]).unwrap();
        assert_eq!(w.len(), 40);
        let dt = w[1].time - w[0].time;
        assert_relative_eq!(
            dt,
            std::f64::consts::TAU * 0.5 / 40.0 / 0.05,
            epsilon = 1e-12
        );
        // the quoted rounded segment time, not π/2 itself
        #[allow(clippy::approx_constant)]
        let quoted = 1.5708;
        assert_relative_eq!(dt, quoted, epsilon = 5e-5);
    }

    #[test]
    fn four_point_circle_hits_the_axes() {
        let w = build_circle_waypoints(1.0, 4, 0.1, [0.0, 0.0]).unwrap();
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (wp, (x, y)) in w.iter().zip(expected) {
            assert_relative_eq!(wp.state.x, x, epsilon = 1e-15);
            assert_relative_eq!(wp.state.y, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn antipodal_velocities_cancel() {
        let w = build_circle_waypoints(0.5, 40, 0.05, [0.3, -0.2]).unwrap();
        for k in 0..20 {
            assert_relative_eq!(w[k].state.x_dot, -w[k + 20].state.x_dot, epsilon = 1e-15);
            assert_relative_eq!(w[k].state.y_dot, -w[k + 20].state.y_dot, epsilon = 1e-15);
        }
    }

    #[test]
    fn heading_and_rate_follow_the_tangent() {
        let w = build_circle_waypoints(0.5, 40, 0.05, [0.0, 0.0]).unwrap();
        for wp in &w {
            let s = &wp.state;
            assert_relative_eq!(s.x_dot.hypot(s.y_dot), 0.05, epsilon = 1e-15);
            assert_relative_eq!(s.theta.cos() * 0.05, s.x_dot, epsilon = 1e-15);
            assert_relative_eq!(s.theta.sin() * 0.05, s.y_dot, epsilon = 1e-15);
            assert_relative_eq!(s.theta_dot, 0.1, epsilon = 1e-15);
            assert_relative_eq!((s.x.powi(2) + s.y.powi(2)).sqrt(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_circle_returns_one_lap_later() {
        let w = scenario_waypoints(&ScenarioKind::default(), Path::new(".")).unwrap();
        assert_eq!(w.len(), 41);
        let (a, b) = (w[0].state, w[40].state);
        assert_relative_eq!(b.theta - a.theta, std::f64::consts::TAU);
        assert_eq!((a.x, a.y, a.x_dot), (b.x, b.y, b.x_dot));
        assert_relative_eq!(
            w[40].time,
            std::f64::consts::TAU * 0.5 / 0.05,
            epsilon = 1e-9
        );
    }

    #[test]
    fn semi_circle_ends_opposite() {
        let kind = ScenarioKind::SemiCircle {
            radius: 1.0,
            waypoint_count: 5,
            tangential_speed: 0.1,
            center: [0.0, 0.0],
        };
        let w = scenario_waypoints(&kind, Path::new(".")).unwrap();
        assert_eq!(w.len(), 5);
        assert_relative_eq!(w[4].state.x, -1.0, epsilon = 1e-15);
        assert_relative_eq!(w[4].time, std::f64::consts::PI / 0.1, epsilon = 1e-12);
    }

    #[test]
    fn waypoint_csv_round_trip_and_errors() {
        let w = build_circle_waypoints(0.5, 6, 0.05, [0.0, 0.0]).unwrap();
        assert_eq!(parse_waypoints(&waypoints_csv(&w)).unwrap(), w);
        assert!(parse_waypoints("t,x\n0,1\n").is_err());
        let one = format!("{WAYPOINT_CSV_HEADER}\n0,0,0,0,0,0,0,0\n");
        assert!(parse_waypoints(&one).is_err());
        let back = format!("{WAYPOINT_CSV_HEADER}\n1,0,0,0,0,0,0,0\n0,0,0,0,0,0,0,0\n");
        assert!(parse_waypoints(&back).is_err());
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(build_circle_waypoints(0.0, 4, 0.1, [0.0, 0.0]).is_err());
        assert!(build_circle_waypoints(1.0, 1, 0.1, [0.0, 0.0]).is_err());
        assert!(build_circle_waypoints(1.0, 4, -0.1, [0.0, 0.0]).is_err());
    }
}
