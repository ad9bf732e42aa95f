//! Self-contained SVG plots of a run log. Coordinates are printed with a
//! fixed number of decimals so equal logs give equal bytes.

use std::fmt::Write;

use super::log::RunLog;
use crate::model::THRUSTER_COUNT;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

const REFERENCE_COLOR: &str = "#888888";
const ACTUAL_COLOR: &str = "#1f77b4";
const ESTIMATE_COLOR: &str = "#d62728";

/// One polyline of a panel.
pub struct Series<'a> {
    pub id: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn of<'a>(pts: impl Iterator<Item = &'a (f64, f64)>) -> Self {
        let mut b = Bounds {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                b.x0 = b.x0.min(x);
                b.x1 = b.x1.max(x);
                b.y0 = b.y0.min(y);
                b.y1 = b.y1.max(y);
            }
        }
        if !b.x0.is_finite() {
            return Bounds {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            };
        }
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = *hi - *lo;
            let extra = if span > 0.0 {
                0.05 * span
            } else {
                0.5 * lo.abs().max(1e-3)
            };
            *lo -= extra;
            *hi += extra;
        };
        pad(&mut b.x0, &mut b.x1);
        pad(&mut b.y0, &mut b.y1);
        b
    }

    /// Widens the narrower axis so one unit has the same length on both.
    fn equal_aspect(mut self, w: f64, h: f64) -> Self {
        let sx = (self.x1 - self.x0) / w;
        let sy = (self.y1 - self.y0) / h;
        if sx > sy {
            let c = 0.5 * (self.y0 + self.y1);
            self.y0 = c - 0.5 * sx * h;
            self.y1 = c + 0.5 * sx * h;
        } else {
            let c = 0.5 * (self.x0 + self.x1);
            self.x0 = c - 0.5 * sy * w;
            self.x1 = c + 0.5 * sy * w;
        }
        self
    }
}

struct Panel {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    b: Bounds,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.b.x0) / (self.b.x1 - self.b.x0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.b.y1 - y) / (self.b.y1 - self.b.y0) * self.h
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str, y_ticks: bool) {
        let (l, t, w, h) = (self.left, self.top, self.w, self.h);
        writeln!(
            out,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#000000"/>"##
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            l + w / 2.0,
            t - 10.0,
            escape(title)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            l + w / 2.0,
            t + h + 32.0,
            escape(xlabel)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            l - 52.0,
            t + h / 2.0,
            l - 52.0,
            t + h / 2.0,
            escape(ylabel)
        )
        .unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.b.x0 + f * (self.b.x1 - self.b.x0);
            let yv = self.b.y0 + f * (self.b.y1 - self.b.y0);
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                self.px(xv),
                t + h + 14.0,
                tick_label(xv)
            )
            .unwrap();
            if !y_ticks {
                continue;
            }
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                l - 4.0,
                self.py(yv) + 3.0,
                tick_label(yv)
            )
            .unwrap();
        }
    }

    fn polyline(&self, out: &mut String, s: &Series) {
        let mut pts = String::new();
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                if !pts.is_empty() {
                    pts.push(' ');
                }
                write!(pts, "{:.2},{:.2}", self.px(x), self.py(y)).unwrap();
            }
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        writeln!(
            out,
            r#"<polyline id="{}" fill="none" stroke="{}" stroke-width="1.5"{dash} points="{pts}"/>"#,
            s.id, s.color
        )
        .unwrap();
    }

    fn legend(&self, out: &mut String, series: &[Series]) {
        for (i, s) in series.iter().enumerate() {
            let y = self.top + 14.0 + 14.0 * i as f64;
            let x = self.left + self.w - 110.0;
            writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
                y - 4.0,
                x + 20.0,
                y - 4.0,
                s.color
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
                x + 24.0,
                escape(s.id)
            )
            .unwrap();
        }
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{body}</svg>\n"
    )
}

fn full_width() -> f64 {
    MARGIN_L + PANEL_W + MARGIN_R
}

/// Stacked panels sharing the time axis.
fn stacked(panels: &[(&str, &str, Vec<Series>)]) -> String {
    let mut body = String::new();
    let mut top = MARGIN_T;
    for (title, ylabel, series) in panels {
        let b = Bounds::of(series.iter().flat_map(|s| s.points.iter()));
        let p = Panel {
            left: MARGIN_L,
            top,
            w: PANEL_W,
            h: PANEL_H,
            b,
        };
        p.frame(&mut body, title, "t [s]", ylabel, true);
        for s in series {
            p.polyline(&mut body, s);
        }
        p.legend(&mut body, series);
        top += PANEL_H + MARGIN_T + MARGIN_B;
    }
    document(full_width(), top, &body)
}

/// Planar path of the truth with the reference overlaid, equal axes.
pub fn ground_track(log: &RunLog) -> String {
    let series = [
        Series {
            id: "reference",
            color: REFERENCE_COLOR,
            dashed: true,
            points: log
                .ticks
                .iter()
                .map(|t| (t.reference.x, t.reference.y))
                .collect(),
        },
        Series {
            id: "actual",
            color: ACTUAL_COLOR,
            dashed: false,
            points: log.ticks.iter().map(|t| (t.truth.x, t.truth.y)).collect(),
        },
    ];
    let side = 480.0;
    let b = Bounds::of(series.iter().flat_map(|s| s.points.iter())).equal_aspect(side, side);
    let p = Panel {
        left: MARGIN_L,
        top: MARGIN_T,
        w: side,
        h: side,
        b,
    };
    let mut body = String::new();
    p.frame(&mut body, "Ground track", "x [m]", "y [m]", true);
    for s in &series {
        p.polyline(&mut body, s);
    }
    p.legend(&mut body, &series);
    document(
        MARGIN_L + side + MARGIN_R,
        MARGIN_T + side + MARGIN_B,
        &body,
    )
}

/// x, y and heading against time with the reference overlaid.
pub fn coordinates(log: &RunLog) -> String {
    let pick = |f: fn(&crate::model::State<f64>) -> f64| {
        let r: Vec<_> = log
            .ticks
            .iter()
            .map(|t| (t.time, f(&t.reference)))
            .collect();
        let a: Vec<_> = log.ticks.iter().map(|t| (t.time, f(&t.truth))).collect();
        vec![
            Series {
                id: "reference",
                color: REFERENCE_COLOR,
                dashed: true,
                points: r,
            },
            Series {
                id: "actual",
                color: ACTUAL_COLOR,
                dashed: false,
                points: a,
            },
        ]
    };
    stacked(&[
        ("x", "x [m]", pick(|s| s.x)),
        ("y", "y [m]", pick(|s| s.y)),
        ("Heading", "theta [rad]", pick(|s| s.theta)),
    ])
}

/// One row per thruster, a bar for every tick the valve is open.
pub fn thruster_raster(log: &RunLog) -> String {
    let row_h = 20.0;
    let h = row_h * THRUSTER_COUNT as f64;
    let (t0, t1) = match (log.ticks.first(), log.ticks.last()) {
        (Some(a), Some(b)) if b.time > a.time => (a.time, b.time),
        (Some(a), _) => (a.time, a.time + 1.0),
        _ => (0.0, 1.0),
    };
    let dt = if log.len() > 1 {
        log.ticks[1].time - log.ticks[0].time
    } else {
        1.0
    };
    let p = Panel {
        left: MARGIN_L,
        top: MARGIN_T,
        w: PANEL_W,
        h,
        b: Bounds {
            x0: t0,
            x1: t1 + dt,
            y0: 0.0,
            y1: THRUSTER_COUNT as f64,
        },
    };
    let mut body = String::new();
    p.frame(&mut body, "Thruster firings", "t [s]", "thruster", false);
    let bar_w = (p.px(t0 + dt) - p.px(t0)).max(0.5);
    for i in 0..THRUSTER_COUNT {
        let y = MARGIN_T + row_h * i as f64;
        writeln!(
            body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">f{i}</text>"#,
            MARGIN_L - 30.0,
            y + row_h * 0.65
        )
        .unwrap();
        let mut rects = String::new();
        for t in &log.ticks {
            if t.applied.thrust[i] > 0.0 {
                write!(
                    rects,
                    r#"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{:.2}"/>"#,
                    p.px(t.time),
                    y + 2.0,
                    row_h - 4.0
                )
                .unwrap();
            }
        }
        writeln!(body, r#"<g id="f{i}" fill="{ACTUAL_COLOR}">{rects}</g>"#).unwrap();
    }
    document(full_width(), MARGIN_T + h + MARGIN_B, &body)
}

/// Wheel speed (true and estimated) and the applied wheel torque.
pub fn wheel(log: &RunLog) -> String {
    let speed = vec![
        Series {
            id: "actual",
            color: ACTUAL_COLOR,
            dashed: false,
            points: log
                .ticks
                .iter()
                .map(|t| (t.time, t.truth.omega_rw))
                .collect(),
        },
        Series {
            id: "estimate",
            color: ESTIMATE_COLOR,
            dashed: true,
            points: log
                .ticks
                .iter()
                .map(|t| (t.time, t.estimate.omega_rw))
                .collect(),
        },
    ];
    let torque = vec![
        Series {
            id: "command",
            color: REFERENCE_COLOR,
            dashed: true,
            points: log.ticks.iter().map(|t| (t.time, t.command.tau)).collect(),
        },
        Series {
            id: "applied",
            color: ACTUAL_COLOR,
            dashed: false,
            points: log.ticks.iter().map(|t| (t.time, t.applied.tau)).collect(),
        },
    ];
    stacked(&[
        ("Wheel speed", "omega_rw [rad/s]", speed),
        ("Wheel torque", "tau [N m]", torque),
    ])
}

/// File name and content of every plot.
pub fn all_plots(log: &RunLog) -> Vec<(&'static str, String)> {
    vec![
        ("ground_track.svg", ground_track(log)),
        ("coordinates.svg", coordinates(log)),
        ("thrusters.svg", thruster_raster(log)),
        ("wheel.svg", wheel(log)),
    ]
}
