//! Plain SVG renderings of the three censuses. Output is deterministic:
//! coordinates are printed with fixed precision.

use std::fmt::Write;

use crate::funcmine::FunctionCensus;
use crate::gates::{GateClass, TwoInputGate};
use crate::rcnet::SweepResult;
use crate::spikegates::RatioReport;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Axes frame mapping data ranges onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = (self.x.1 - self.x.0).max(f64::MIN_POSITIVE);
        LEFT + (x - self.x.0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let span = (self.y.1 - self.y.0).max(f64::MIN_POSITIVE);
        HEIGHT - BOTTOM - (y - self.y.0) / span * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1} {y0:.1} V{y1:.1} H{x1:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn y_ticks(svg: &mut String, f: &Frame, ticks: &[(f64, String)]) {
    for (v, label) in ticks {
        let y = f.py(*v);
        let _ = writeln!(
            svg,
            r#"<path d="M{:.1} {y:.1} h-5" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT,
            LEFT - 8.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn x_ticks(svg: &mut String, f: &Frame, ticks: &[(f64, String)]) {
    for (v, label) in ticks {
        let x = f.px(*v);
        let y = HEIGHT - BOTTOM;
        let _ = writeln!(
            svg,
            r#"<path d="M{x:.1} {y:.1} v5" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y + 20.0,
            escape(label)
        );
    }
}

fn legend(svg: &mut String, row: usize, colour: &str, label: &str) {
    let x = WIDTH - RIGHT + 15.0;
    let y = TOP + 10.0 + 20.0 * row as f64;
    let _ = writeln!(
        svg,
        r#"<path d="M{x:.1} {y:.1} h20" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
        x + 26.0,
        y + 4.0,
        escape(label)
    );
}

/// Polyline through `points`, broken wherever a point is `None`.
fn polyline(
    svg: &mut String,
    f: &Frame,
    points: impl Iterator<Item = Option<(f64, f64)>>,
    colour: &str,
) {
    let mut d = String::new();
    let mut pen_down = false;
    for p in points {
        match p {
            Some((x, y)) => {
                let _ = write!(
                    d,
                    "{}{:.2} {:.2} ",
                    if pen_down { "L" } else { "M" },
                    f.px(x),
                    f.py(y)
                );
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    if !d.is_empty() {
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
    }
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    (lo.floor() as i32..=hi.ceil() as i32)
        .map(|e| (e as f64, format!("1e{e}")))
        .collect()
}

/// Gate frequency ratios with one polyline per substrate; gates run along
/// the x axis in ratio order. Reports without events are listed but not
/// drawn.
pub fn gate_ratio_svg(reports: &[RatioReport]) -> String {
    let mut svg = String::new();
    open(&mut svg, "Gate frequency ratios", "gate", "ratio");
    let ymax = reports
        .iter()
        .filter_map(|r| r.ratios.as_ref())
        .flatten()
        .fold(0.0_f64, |m, &r| m.max(r));
    let ymax = if ymax > 0.0 {
        (ymax * 10.0).ceil() / 10.0
    } else {
        1.0
    };
    let f = Frame {
        x: (-0.5, 6.5),
        y: (0.0, ymax),
    };
    let gates: Vec<(f64, String)> = TwoInputGate::RATIO_ORDER
        .iter()
        .enumerate()
        .map(|(i, g)| (i as f64, g.symbol().to_string()))
        .collect();
    x_ticks(&mut svg, &f, &gates);
    let steps = 5;
    let ticks: Vec<(f64, String)> = (0..=steps)
        .map(|i| {
            let v = ymax * i as f64 / steps as f64;
            (v, format!("{v:.2}"))
        })
        .collect();
    y_ticks(&mut svg, &f, &ticks);
    for (i, r) in reports.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        match &r.ratios {
            Some(ratios) => {
                polyline(
                    &mut svg,
                    &f,
                    ratios.iter().enumerate().map(|(k, &v)| Some((k as f64, v))),
                    colour,
                );
                legend(
                    &mut svg,
                    i,
                    colour,
                    &format!("{} (n={})", r.substrate, r.total),
                );
            }
            None => legend(
                &mut svg,
                i,
                "#bbbbbb",
                &format!("{} (no events)", r.substrate),
            ),
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Per-class gate counts against θ on a logarithmic count axis; zero
/// counts leave gaps.
pub fn sweep_svg(sweep: &SweepResult, title: &str) -> String {
    let mut svg = String::new();
    open(&mut svg, title, "θ (V)", "gate count");
    let positive = sweep.counts.iter().flatten().filter(|&&n| n > 0);
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &n| {
        let l = (n as f64).log10();
        (lo.min(l), hi.max(l))
    });
    let (lo, hi) = if lo.is_finite() {
        (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
    } else {
        (0.0, 1.0)
    };
    let (t0, t1) = (
        sweep.thetas[0],
        *sweep.thetas.last().unwrap_or(&sweep.thetas[0]),
    );
    let f = Frame {
        x: (t0, t1.max(t0 + f64::EPSILON)),
        y: (lo, hi),
    };
    let xt: Vec<(f64, String)> = (0..=4)
        .map(|i| {
            let v = t0 + (t1 - t0) * i as f64 / 4.0;
            (v, format!("{v:.4}"))
        })
        .collect();
    x_ticks(&mut svg, &f, &xt);
    y_ticks(&mut svg, &f, &decade_ticks(lo, hi));
    for (i, class) in GateClass::ALL.iter().enumerate() {
        let colour = PALETTE[i];
        let total = sweep.total(*class);
        let points = sweep.thetas.iter().zip(&sweep.counts).map(|(&t, row)| {
            let n = row[class.index()];
            (n > 0).then(|| (t, (n as f64).log10()))
        });
        polyline(&mut svg, &f, points, colour);
        legend(&mut svg, i, colour, &format!("{} (Σ={total})", class.key()));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Histogram of mined functions over their decimal table value, bar height
/// `log10(1 + count)`.
pub fn census_svg(census: &FunctionCensus) -> String {
    let mut svg = String::new();
    open(
        &mut svg,
        &format!(
            "Function census: {} tables, {} unique",
            census.total(),
            census.unique()
        ),
        "truth table (decimal)",
        "log10(1 + count)",
    );
    let top = census
        .counts
        .values()
        .map(|&n| (1.0 + n as f64).log10())
        .fold(1.0_f64, f64::max)
        .ceil();
    let f = Frame {
        x: (0.0, 65535.0),
        y: (0.0, top),
    };
    let xt: Vec<(f64, String)> = (0..=4)
        .map(|i| {
            let v = (65535 * i / 4) as f64;
            (v, format!("{v}"))
        })
        .collect();
    x_ticks(&mut svg, &f, &xt);
    let yt: Vec<(f64, String)> = (0..=top as i32)
        .map(|e| (e as f64, format!("{e}")))
        .collect();
    y_ticks(&mut svg, &f, &yt);
    for (&t, &n) in &census.counts {
        let x = f.px(t as f64);
        let _ = writeln!(
            svg,
            r#"<path d="M{x:.2} {:.2} V{:.2}" stroke="{}" stroke-width="1.5"/>"#,
            f.py(0.0),
            f.py((1.0 + n as f64).log10()),
            PALETTE[0]
        );
    }
    svg.push_str("</svg>\n");
    svg
}
