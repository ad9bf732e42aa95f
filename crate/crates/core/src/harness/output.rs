//! Writes the artifacts of a run into an output directory.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::estimator_log_csv;
use crate::planner::Trajectory;
use crate::tracker::GainSchedule;

use super::log::RunLog;
use super::metrics::RunMetrics;
use super::svg::all_plots;

fn write(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// One CSV per planned segment, `segment_000.csv` onwards.
pub fn write_trajectories(dir: &Path, segments: &[Trajectory]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    segments
        .iter()
        .enumerate()
        .map(|(i, s)| write(dir, &format!("segment_{i:03}.csv"), &s.to_csv()))
        .collect()
}

/// Plot files for `log`.
pub fn write_plots(dir: &Path, log: &RunLog) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    all_plots(log)
        .into_iter()
        .map(|(name, svg)| write(dir, name, &svg))
        .collect()
}

/// Run log, firing and estimator logs, metrics, gains and plots.
pub fn emit_outputs(
    dir: &Path,
    log: &RunLog,
    metrics: Option<&RunMetrics>,
    schedule: Option<&GainSchedule>,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut files = vec![
        write(dir, "log.csv", &log.to_csv())?,
        write(dir, "firing.csv", &log.firing_csv())?,
        write(
            dir,
            "estimator.csv",
            &estimator_log_csv(&log.estimator_rows()),
        )?,
    ];
    if let Some(m) = metrics {
        files.push(write(dir, "metrics.json", &m.to_json())?);
    }
    if let Some(s) = schedule {
        files.push(write(dir, "gains.csv", &s.to_csv())?);
    }
    files.extend(write_plots(dir, log)?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::log::Tick;
    use crate::harness::metrics::metrics_from_log;
    use crate::model::{Control, State};

    fn log() -> RunLog {
        RunLog {
            ticks: (0..5)
                .map(|k| Tick {
                    time: 0.1 * k as f64,
                    segment: 0,
                    truth: State::at_pose(0.01 * k as f64, 0.0, 0.0),
                    reference: State::zero(),
                    measurement: State::zero(),
                    estimate: State::zero(),
                    p_diag: [1e-6; 7],
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
    fn emitting_twice_gives_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let log = log();
        let m = metrics_from_log(&log).unwrap();
        let read = |files: &[PathBuf]| -> Vec<Vec<u8>> {
            files.iter().map(|f| std::fs::read(f).unwrap()).collect()
        };
        let first = emit_outputs(dir.path(), &log, Some(&m), None).unwrap();
        let a = read(&first);
        let second = emit_outputs(dir.path(), &log, Some(&m), None).unwrap();
        assert_eq!(first, second);
        assert_eq!(a, read(&second));
        let names: Vec<_> = first
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap())
            .collect();
        assert!(names.contains(&"metrics.json") && names.contains(&"ground_track.svg"));
    }

    #[test]
    fn io_failure_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_outputs(&blocker.join("sub"), &log(), None, None).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
