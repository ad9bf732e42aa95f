use std::path::Path;

use flatfloor::harness::{
    compute_errors, plan_scenario, run_scenario, track_reference, FloorConfig, RunLog,
    ScenarioConfig, ScenarioKind, Tick,
};
use flatfloor::model::{Control, State};
use flatfloor::tracker::{sample_count, Reference};

fn here() -> &'static Path {
    Path::new(".")
}

fn circle_reference(cfg: &ScenarioConfig) -> Reference {
    Reference::new(plan_scenario(cfg, here()).unwrap()).unwrap()
}

#[test]
fn noise_free_rest_to_rest_ends_within_a_millimetre() {
    let mut cfg = ScenarioConfig::default();
    cfg.noise.sigma_position = 0.0;
    cfg.noise.sigma_velocity = 0.0;
    cfg.noise.sigma_angle = 0.0;
    cfg.noise.sigma_ang_velocity = 0.0;
    cfg.scenario = ScenarioKind::StraightLine {
        start: [0.0, 0.0, 0.0],
        goal: [1.0, 0.0, 0.0],
        duration: 10.0,
    };
    let out = run_scenario(&cfg, here()).unwrap();
    let last = out.log.ticks.last().unwrap();
    assert!((last.time - 10.0).abs() < 1e-9);
    let miss = (last.truth.x - 1.0).hypot(last.truth.y);
    assert!(miss <= 1e-3, "final position error {miss} m");
}

#[test]
fn same_seed_same_log_different_seed_different_log() {
    let cfg = ScenarioConfig::default();
    let reference = circle_reference(&cfg);
    let a = track_reference(&cfg, here(), reference.clone()).unwrap();
    let b = track_reference(&cfg, here(), reference.clone()).unwrap();
    assert_eq!(a.log.to_csv(), b.log.to_csv());
    let mut other = cfg.clone();
    other.noise.seed = 1;
    let c = track_reference(&other, here(), reference).unwrap();
    assert_ne!(a.log.to_csv(), c.log.to_csv());
}

#[test]
fn dem_floor_increases_planar_error() {
    let cfg = ScenarioConfig::default();
    let reference = circle_reference(&cfg);
    for seed in [0, 3] {
        let mut flat = cfg.clone();
        flat.noise.seed = seed;
        let dem = ScenarioConfig {
            floor: FloorConfig::Bundled,
            ..flat.clone()
        };
        let f = track_reference(&flat, here(), reference.clone())
            .unwrap()
            .metrics
            .unwrap();
        let d = track_reference(&dem, here(), reference.clone())
            .unwrap()
            .metrics
            .unwrap();
        assert!(
            d.e_xy_m > f.e_xy_m,
            "seed {seed}: {} <= {}",
            d.e_xy_m,
            f.e_xy_m
        );
    }
}

#[test]
fn tenfold_position_noise_does_not_reduce_error() {
    let cfg = ScenarioConfig::default();
    let reference = circle_reference(&cfg);
    let mut not_lower = 0;
    for seed in 0..5 {
        let mut base = cfg.clone();
        base.noise.seed = seed;
        let mut noisy = base.clone();
        noisy.noise.sigma_position *= 10.0;
        let b = track_reference(&base, here(), reference.clone())
            .unwrap()
            .metrics
            .unwrap();
        let n = track_reference(&noisy, here(), reference.clone())
            .unwrap()
            .metrics
            .unwrap();
        if n.e_xy_m >= b.e_xy_m {
            not_lower += 1;
        }
    }
    assert!(not_lower >= 4, "only {not_lower} of 5 seeds");
}

#[test]
fn reference_is_continuous_at_every_junction() {
    let segments = plan_scenario(&ScenarioConfig::default(), here()).unwrap();
    assert_eq!(segments.len(), 40);
    for pair in segments.windows(2) {
        let (end, start) = (pair[0].states().last().unwrap(), pair[1].states()[0]);
        assert_eq!(pair[0].end_time(), pair[1].start_time());
        assert_eq!(
            (end.x, end.y, end.x_dot, end.y_dot),
            (start.x, start.y, start.x_dot, start.y_dot)
        );
    }
}

#[test]
fn reference_against_itself_has_zero_error() {
    let cfg = ScenarioConfig::default();
    let reference = circle_reference(&cfg);
    let dt = cfg.tracker.dt_ctrl;
    let ticks = (0..sample_count(reference.duration(), dt))
        .map(|k| {
            let t = reference.start_time() + k as f64 * dt;
            let s = reference.sample(t).0;
            Tick {
                time: t,
                segment: reference.segment_index(t),
                truth: s,
                reference: s,
                measurement: s,
                estimate: s,
                p_diag: [0.0; 7],
                nees: 0.0,
                command: Control::zero(),
                applied: Control::zero(),
                disturbance: [0.0; 2],
                rw_saturated: false,
            }
        })
        .collect();
    let m = compute_errors(&RunLog { ticks }, &reference).unwrap();
    assert_eq!(
        (m.e_x_m, m.e_y_m, m.e_xy_m, m.e_theta_deg),
        (0.0, 0.0, 0.0, 0.0)
    );
    assert_eq!(m.segments.len(), 40);
}

#[test]
fn log_is_uniform_and_logged_reference_matches() {
    let cfg = ScenarioConfig::default();
    let out = run_scenario(&cfg, here()).unwrap();
    let ticks = &out.log.ticks;
    assert_eq!(
        ticks.len(),
        sample_count(out.reference.duration(), cfg.tracker.dt_ctrl)
    );
    for (k, t) in ticks.iter().enumerate() {
        assert!((t.time - k as f64 * cfg.tracker.dt_ctrl).abs() < 1e-9);
        assert_eq!(t.reference, out.reference.sample(t.time).0);
        assert!(t
            .applied
            .thrust
            .iter()
            .all(|&f| f == 0.0 || f == cfg.platform.thrust_max));
    }
    let from_log = flatfloor::harness::metrics_from_log(&out.log).unwrap();
    assert_eq!(Some(from_log), out.metrics);
    // the first estimate is the first measurement
    assert_eq!(ticks[0].estimate, ticks[0].measurement);
    let start = State::from_array(ticks[0].reference.to_array());
    assert_eq!(ticks[0].truth, start);
}
