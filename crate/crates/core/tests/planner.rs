use std::time::Instant;

use flatfloor::model::{PlatformParams, State};
use flatfloor::planner::{
    hermite_defects, max_defect, plan_segment, plan_waypoint_sequence, BoundaryConditions,
    PlannerConfig, Trajectory, Waypoint,
};

fn translation() -> BoundaryConditions {
    BoundaryConditions {
        x_init: State::zero(),
        x_final: State::at_pose(1.0, 0.0, 0.0),
        duration: 10.0,
    }
}

fn plan(bc: &BoundaryConditions, cfg: &PlannerConfig, p: &PlatformParams<f64>) -> Trajectory {
    match plan_segment(bc, cfg, p).unwrap() {
        Ok(t) => t,
        Err(f) => panic!("{f}"),
    }
}

fn mirror(s: &State<f64>) -> State<f64> {
    State {
        y: -s.y,
        theta: -s.theta,
        y_dot: -s.y_dot,
        theta_dot: -s.theta_dot,
        omega_rw: -s.omega_rw,
        ..*s
    }
}

#[test]
fn straight_translation_converges() {
    let p = PlatformParams::default();
    let cfg = PlannerConfig::default();
    let start = Instant::now();
    let t = plan(&translation(), &cfg, &p);
    let elapsed = start.elapsed().as_secs_f64();
    let d = hermite_defects(t.states(), t.controls(), &p, t.dt()).unwrap();
    assert!(max_defect(&d) <= 1e-6);
    let last = t.states().last().unwrap();
    assert_eq!(t.states()[0], State::zero());
    assert_eq!(*last, State::at_pose(1.0, 0.0, 0.0));
    assert!(last.x_dot.abs() <= 1e-8 && last.y_dot.abs() <= 1e-8);
    assert!(t.controls().iter().all(|u| u.within_continuous_bounds(&p)));
    let diag = t.diagnostics().unwrap();
    assert!(diag.stationarity <= 1e-4);
    assert!(elapsed < 10.0, "{elapsed} s");
    // the translation is done by the +x / -x thrusters
    let impulse_x: f64 = t.controls().iter().map(|u| u.thrust[3] + u.thrust[6]).sum();
    assert!(impulse_x > 0.0);
}

#[test]
fn mirrored_problem_has_the_same_cost() {
    let p = PlatformParams::default();
    let cfg = PlannerConfig::default();
    let bc = BoundaryConditions {
        x_init: State::at_pose(0.0, 0.1, 0.2),
        x_final: State {
            x_dot: 0.02,
            y_dot: 0.01,
            ..State::at_pose(0.6, 0.4, 0.7)
        },
        duration: 8.0,
    };
    let mbc = BoundaryConditions {
        x_init: mirror(&bc.x_init),
        x_final: mirror(&bc.x_final),
        duration: bc.duration,
    };
    let a = plan(&bc, &cfg, &p);
    let b = plan(&mbc, &cfg, &p);
    let (ca, cb) = (a.cost(&cfg.actuation_weight), b.cost(&cfg.actuation_weight));
    assert!((ca - cb).abs() <= 1e-6, "{ca} vs {cb}");
    for (x, y) in a.states().iter().zip(b.states()) {
        let m = mirror(x);
        assert!((m.y - y.y).abs() < 1e-3 && (m.theta - y.theta).abs() < 1e-3);
    }
}

#[test]
fn wider_thrust_bounds_never_cost_more() {
    let cfg = PlannerConfig::default();
    let bc = BoundaryConditions {
        x_init: State::zero(),
        x_final: State::at_pose(1.5, -0.5, 1.0),
        duration: 15.0,
    };
    let p10 = PlatformParams::default();
    let p20 = PlatformParams {
        thrust_max: 20.0,
        ..p10
    };
    let c10 = plan(&bc, &cfg, &p10).cost(&cfg.actuation_weight);
    let c20 = plan(&bc, &cfg, &p20).cost(&cfg.actuation_weight);
    assert!(c20 <= c10 + 1e-6, "{c20} > {c10}");
}

#[test]
fn planning_is_deterministic() {
    let p = PlatformParams::default();
    let cfg = PlannerConfig::default();
    let a = plan(&translation(), &cfg, &p);
    let b = plan(&translation(), &cfg, &p);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn waypoint_segments_join_exactly() {
    let p = PlatformParams::default();
    let cfg = PlannerConfig::default();
    // heading wraps through pi between the second and third waypoint
    let wps = [
        Waypoint {
            time: 0.0,
            state: State::at_pose(0.0, 0.0, 2.8),
        },
        Waypoint {
            time: 10.0,
            state: State::at_pose(0.2, 0.1, 3.1),
        },
        Waypoint {
            time: 20.0,
            state: State::at_pose(0.4, 0.1, -3.0),
        },
    ];
    let segs = plan_waypoint_sequence(&wps, &cfg, &p).unwrap();
    assert_eq!(segs.len(), 2);
    assert_eq!(segs[0].states().last().unwrap(), &segs[1].states()[0]);
    assert_eq!(segs[0].end_time(), segs[1].start_time());
    let sweep = segs[1].states().last().unwrap().theta - segs[1].states()[0].theta;
    assert!(sweep > 0.0 && sweep < 0.5);
}

#[test]
fn csv_round_trip_of_a_solution() {
    let p = PlatformParams::default();
    let cfg = PlannerConfig::default();
    let t = plan(&translation(), &cfg, &p);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    t.write_csv(&path).unwrap();
    let back = Trajectory::read_csv(&path, &p, cfg.feasibility_tol).unwrap();
    assert_eq!(back.to_csv(), t.to_csv());
    assert_eq!(back.states(), t.states());
}
