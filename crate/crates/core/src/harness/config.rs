//! Scenario configuration: one TOML document with a section per module.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::{HeightField, ImageScaling, NoiseModel};
use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::model::PlatformParams;
use crate::planner::PlannerConfig;
use crate::tracker::TrackerConfig;

/// Side length [px], resolution [m/px] and origin of the bundled floor map.
pub const BUNDLED_DEM_SIDE: usize = 513;
pub const BUNDLED_DEM_RESOLUTION: f64 = 0.02;
pub const BUNDLED_DEM_ORIGIN: (f64, f64) = (-5.12, -5.12);
/// Height of a full-scale pixel in the bundled map [m].
pub const BUNDLED_DEM_HEIGHT_SCALE: f64 = 0.002;
/// Generator settings the bundled map was produced with.
pub const BUNDLED_DEM_MAX_SLOPE: f64 = 1e-3;
pub const BUNDLED_DEM_SEED: u64 = 2024;

static BUNDLED_DEM: &[u8] = include_bytes!("../../assets/floor_dem.pgm");

/// Floor under the platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FloorConfig {
    /// Perfectly level floor, no disturbance.
    #[default]
    Flat,
    /// The height map shipped with the crate (10.24 m square, centered).
    Bundled,
    /// Smooth random field whose steepest slope is `max_slope`.
    Procedural {
        side_px: usize,
        resolution: f64,
        origin: [f64; 2],
        max_slope: f64,
        seed: u64,
    },
    /// Gray-scale portable graymap; full-scale intensity maps to `height_scale` [m].
    Pgm {
        path: PathBuf,
        height_scale: f64,
        resolution: f64,
        origin: [f64; 2],
    },
    /// Numeric grid with a `resolution,origin_x,origin_y` first line.
    Csv { path: PathBuf },
}

impl FloorConfig {
    /// Loads the field; `None` for a flat floor.
    pub fn load(&self, base: &Path) -> Result<Option<HeightField<f64>>> {
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        Ok(match self {
            FloorConfig::Flat => None,
            FloorConfig::Bundled => Some(bundled_dem()?),
            FloorConfig::Procedural {
                side_px,
                resolution,
                origin,
                max_slope,
                seed,
            } => Some(HeightField::procedural(
                *side_px,
                *resolution,
                (origin[0], origin[1]),
                *max_slope,
                *seed,
            )?),
            FloorConfig::Pgm {
                path,
                height_scale,
                resolution,
                origin,
            } => Some(HeightField::load_pgm(
                &resolve(path),
                ImageScaling {
                    height_scale: *height_scale,
                    resolution: *resolution,
                    origin: (origin[0], origin[1]),
                },
            )?),
            FloorConfig::Csv { path } => Some(HeightField::load_csv(&resolve(path))?),
        })
    }
}

/// The shipped floor map.
pub fn bundled_dem() -> Result<HeightField<f64>> {
    let img = crate::environment::parse_pgm(BUNDLED_DEM)?;
    HeightField::from_image(
        &img,
        ImageScaling {
            height_scale: BUNDLED_DEM_HEIGHT_SCALE,
            resolution: BUNDLED_DEM_RESOLUTION,
            origin: BUNDLED_DEM_ORIGIN,
        },
    )
}

/// Procedural field the bundled map is a 16-bit quantization of.
pub fn bundled_dem_source() -> Result<HeightField<f64>> {
    HeightField::procedural(
        BUNDLED_DEM_SIDE,
        BUNDLED_DEM_RESOLUTION,
        BUNDLED_DEM_ORIGIN,
        BUNDLED_DEM_MAX_SLOPE,
        BUNDLED_DEM_SEED,
    )
}

/// What the platform is asked to do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioKind {
    /// Closed loop of `waypoint_count` tangent-aligned states on a circle.
    Circle {
        radius: f64,
        waypoint_count: usize,
        tangential_speed: f64,
        center: [f64; 2],
    },
    /// Half circle, start and end included.
    SemiCircle {
        radius: f64,
        waypoint_count: usize,
        tangential_speed: f64,
        center: [f64; 2],
    },
    /// Rest-to-rest move between two poses `[x, y, theta]`.
    StraightLine {
        start: [f64; 3],
        goal: [f64; 3],
        duration: f64,
    },
    /// Waypoint CSV with header `t,x,y,theta,xdot,ydot,thetadot,omega_rw`.
    Custom { path: PathBuf },
}

impl Default for ScenarioKind {
    fn default() -> Self {
        ScenarioKind::Circle {
            radius: 0.5,
            waypoint_count: 40,
            tangential_speed: 0.05,
            center: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Truth integration step [s]; must divide the control period.
    pub dt_sim: f64,
    /// Directory for logs, metrics and plots.
    pub output_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_sim: 1e-3,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Complete run description. The sensor-noise seed (`noise.seed`) is the only
/// source of randomness in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub platform: PlatformParams<f64>,
    pub planner: PlannerConfig,
    pub tracker: TrackerConfig,
    pub estimator: EstimatorConfig,
    pub noise: NoiseModel<f64>,
    pub floor: FloorConfig,
    pub scenario: ScenarioKind,
    pub sim: SimConfig,
}

impl ScenarioConfig {
    /// Number of truth steps per control tick.
    pub fn substeps(&self) -> Result<usize> {
        let ratio = self.tracker.dt_ctrl / self.sim.dt_sim;
        let n = ratio.round();
        if !(self.sim.dt_sim > 0.0) || n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::Config(format!(
                "sim.dt_sim = {} must divide tracker.dt_ctrl = {}",
                self.sim.dt_sim, self.tracker.dt_ctrl
            )));
        }
        Ok(n as usize)
    }

    /// Checks every section. Referenced files must exist relative to `base`.
    pub fn validate(&self, base: &Path) -> Result<()> {
        self.platform.validate().map_err(as_config)?;
        self.planner.validate()?;
        self.tracker.validate()?;
        self.estimator.validate()?;
        self.noise.validate()?;
        self.substeps()?;
        let exists = |p: &Path| {
            let full = if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            };
            if full.exists() {
                Ok(())
            } else {
                Err(Error::Config(format!("file not found: {}", full.display())))
            }
        };
        match &self.floor {
            FloorConfig::Pgm { path, .. } | FloorConfig::Csv { path } => exists(path)?,
            FloorConfig::Procedural {
                side_px,
                resolution,
                max_slope,
                ..
            } => {
                if *side_px < 2 || !(*resolution > 0.0) || !(*max_slope >= 0.0) {
                    return Err(Error::Config(
                        "procedural floor needs side_px >= 2, resolution > 0, max_slope >= 0"
                            .into(),
                    ));
                }
            }
            FloorConfig::Flat | FloorConfig::Bundled => {}
        }
        match &self.scenario {
            ScenarioKind::Circle {
                radius,
                waypoint_count,
                tangential_speed,
                ..
            }
            | ScenarioKind::SemiCircle {
                radius,
                waypoint_count,
                tangential_speed,
                ..
            } => {
                if !(*radius > 0.0 && *tangential_speed > 0.0) || *waypoint_count < 2 {
                    return Err(Error::Config(
                        "circle scenarios need radius > 0, tangential_speed > 0, waypoint_count >= 2".into(),
                    ));
                }
            }
            ScenarioKind::StraightLine { duration, .. } => {
                if !(*duration > 0.0) {
                    return Err(Error::Config("straight_line duration must be > 0".into()));
                }
            }
            ScenarioKind::Custom { path } => exists(path)?,
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses `text` after applying `key.path=value` overrides. Values are
    /// read as TOML (`1e-3`, `true`, `[1, 2]`, `"s"`) and fall back to a bare
    /// string.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(doc: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            Error::Config(format!("override key `{key}`: `{part}` is not a section"))
        })?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(
            ScenarioConfig::from_toml("").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let text = include_str!("../../../../configs/circle.toml");
        assert_eq!(
            ScenarioConfig::from_toml(text).unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn serialization_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.floor = FloorConfig::Bundled;
        cfg.scenario = ScenarioKind::StraightLine {
            start: [0.0, 0.0, 0.0],
            goal: [1.0, 0.5, 0.3],
            duration: 10.0,
        };
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = ScenarioConfig::from_toml_with_overrides(
            "",
            &[
                "noise.seed=7".into(),
                "platform.rw_speed_max = 20".into(),
                "tracker.q=[1,2,3,4,5,6,7]".into(),
                "floor.kind=bundled".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.noise.seed, 7);
        assert_eq!(cfg.platform.rw_speed_max, 20.0);
        assert_eq!(cfg.tracker.q, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(cfg.floor, FloorConfig::Bundled);
    }

    #[test]
    fn unknown_keys_and_bad_overrides_fail() {
        assert!(matches!(
            ScenarioConfig::from_toml("[platform]\nmass = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(ScenarioConfig::from_toml_with_overrides("", &["noise.seed".into()]).is_err());
        assert!(
            ScenarioConfig::from_toml_with_overrides("", &["noise.seed=\"x\"".into()]).is_err()
        );
        assert!(ScenarioConfig::from_toml_with_overrides("", &["noise..seed=1".into()]).is_err());
    }

    #[test]
    fn validation_catches_inconsistent_settings() {
        let base = Path::new(".");
        assert!(ScenarioConfig::default().validate(base).is_ok());
        let mut cfg = ScenarioConfig::default();
        cfg.sim.dt_sim = 0.03;
        assert!(matches!(cfg.validate(base), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::default();
        cfg.platform.mass_total = -1.0;
        assert!(matches!(cfg.validate(base), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::default();
        cfg.floor = FloorConfig::Csv {
            path: "does/not/exist.csv".into(),
        };
        assert!(cfg.validate(base).is_err());
    }

    #[test]
    fn bundled_map_is_the_quantized_generator_output() {
        let shipped = bundled_dem().unwrap();
        let source = bundled_dem_source().unwrap();
        assert_eq!(shipped.rows(), BUNDLED_DEM_SIDE);
        let top = source.heights().iter().copied().fold(0.0, f64::max);
        assert!(top <= BUNDLED_DEM_HEIGHT_SCALE);
        let step = BUNDLED_DEM_HEIGHT_SCALE / 65535.0;
        for (a, b) in shipped.heights().iter().zip(source.heights()) {
            assert!((a - b).abs() <= 0.5 * step + 1e-15);
        }
        let slope = shipped.max_slope();
        assert!(
            (slope - BUNDLED_DEM_MAX_SLOPE).abs() < 0.05 * BUNDLED_DEM_MAX_SLOPE,
            "{slope}"
        );
    }
}
