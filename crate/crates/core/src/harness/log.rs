//! Per-tick run log and its CSV form. Floats are written in shortest
//! round-trip notation, so parsing a written log gives back the same bits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Control, State, CONTROL_DIM, STATE_DIM, THRUSTER_COUNT};

const STATE_NAMES: [&str; STATE_DIM] = ["x", "y", "theta", "xdot", "ydot", "thetadot", "omega_rw"];
const CONTROL_NAMES: [&str; CONTROL_DIM] = ["tau", "f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"];

/// One control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub time: f64,
    /// Index of the reference segment active at `time`.
    pub segment: usize,
    pub truth: State<f64>,
    pub reference: State<f64>,
    pub measurement: State<f64>,
    pub estimate: State<f64>,
    /// Diagonal of the estimate covariance after the update.
    pub p_diag: [f64; STATE_DIM],
    /// Normalized estimation error squared of the updated estimate.
    pub nees: f64,
    /// Continuous feedback command.
    pub command: Control<f64>,
    /// Binary thrust and saturated wheel torque sent to the plant.
    pub applied: Control<f64>,
    /// Floor disturbance acceleration at the truth position [m/s^2].
    pub disturbance: [f64; 2],
    /// The wheel speed limit cut the torque during this tick.
    pub rw_saturated: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub ticks: Vec<Tick>,
}

fn header() -> String {
    let mut cols = vec!["t".to_string(), "segment".to_string()];
    for prefix in ["", "ref_", "z_", "est_", "p_"] {
        cols.extend(STATE_NAMES.iter().map(|n| format!("{prefix}{n}")));
    }
    for prefix in ["cmd_", "app_"] {
        cols.extend(CONTROL_NAMES.iter().map(|n| format!("{prefix}{n}")));
    }
    cols.extend(["w_x", "w_y", "nees", "rw_saturated"].map(String::from));
    cols.join(",")
}

const COLUMNS: usize = 2 + 5 * STATE_DIM + 2 * CONTROL_DIM + 4;

impl RunLog {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            ticks: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: Tick) {
        self.ticks.push(t);
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn csv_header() -> String {
        header()
    }

    pub fn to_csv(&self) -> String {
        let mut out = header();
        out.push('\n');
        for t in &self.ticks {
            let mut fields: Vec<String> = Vec::with_capacity(COLUMNS);
            fields.push(t.time.to_string());
            fields.push(t.segment.to_string());
            for s in [&t.truth, &t.reference, &t.measurement, &t.estimate] {
                fields.extend(s.to_array().iter().map(f64::to_string));
            }
            fields.extend(t.p_diag.iter().map(f64::to_string));
            for u in [&t.command, &t.applied] {
                fields.extend(u.to_array().iter().map(f64::to_string));
            }
            fields.extend(t.disturbance.iter().map(f64::to_string));
            fields.push(t.nees.to_string());
            fields.push(u8::from(t.rw_saturated).to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == header() => {}
            _ => return Err(Error::Format("run log header mismatch".into())),
        }
        let mut ticks = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<&str> = line.split(',').collect();
            if v.len() != COLUMNS {
                return Err(Error::Format(format!(
                    "run log row {}: expected {COLUMNS} fields, got {}",
                    i + 1,
                    v.len()
                )));
            }
            let num = |j: usize| -> Result<f64> {
                v[j].trim().parse::<f64>().map_err(|_| {
                    Error::Format(format!("run log row {}: bad number `{}`", i + 1, v[j]))
                })
            };
            let state = |at: usize| -> Result<State<f64>> {
                let mut a = [0.0; STATE_DIM];
                for (k, slot) in a.iter_mut().enumerate() {
                    *slot = num(at + k)?;
                }
                Ok(State::from_array(a))
            };
            let control = |at: usize| -> Result<Control<f64>> {
                let mut a = [0.0; CONTROL_DIM];
                for (k, slot) in a.iter_mut().enumerate() {
                    *slot = num(at + k)?;
                }
                Ok(Control::from_array(a))
            };
            let segment = v[1]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("run log row {}: bad segment", i + 1)))?;
            let s = 2;
            let c = s + 5 * STATE_DIM;
            let w = c + 2 * CONTROL_DIM;
            ticks.push(Tick {
                time: num(0)?,
                segment,
                truth: state(s)?,
                reference: state(s + STATE_DIM)?,
                measurement: state(s + 2 * STATE_DIM)?,
                estimate: state(s + 3 * STATE_DIM)?,
                p_diag: state(s + 4 * STATE_DIM)?.to_array(),
                command: control(c)?,
                applied: control(c + CONTROL_DIM)?,
                disturbance: [num(w)?, num(w + 1)?],
                nees: num(w + 2)?,
                rw_saturated: match v[w + 3].trim() {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::Format(format!(
                            "run log row {}: bad flag `{other}`",
                            i + 1
                        )))
                    }
                },
            });
        }
        Ok(Self { ticks })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    /// `t,f0..f7,tau_applied` per tick.
    pub fn firing_csv(&self) -> String {
        let mut out = String::from("t,f0,f1,f2,f3,f4,f5,f6,f7,tau_applied\n");
        for t in &self.ticks {
            out.push_str(&t.time.to_string());
            for f in t.applied.thrust.iter().take(THRUSTER_COUNT) {
                out.push(',');
                out.push_str(&f.to_string());
            }
            out.push(',');
            out.push_str(&t.applied.tau.to_string());
            out.push('\n');
        }
        out
    }

    /// Rows for the estimator log: time, estimate, covariance diagonal.
    pub fn estimator_rows(&self) -> Vec<(f64, State<f64>, [f64; STATE_DIM])> {
        self.ticks
            .iter()
            .map(|t| (t.time, t.estimate, t.p_diag))
            .collect()
    }
}
