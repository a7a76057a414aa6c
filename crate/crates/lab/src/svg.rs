//! Static SVG comparison plots: empirical frequency (solid) against the
//! selected law(s) (dotted), with a vertical marker at `ĥ*`.

use std::fmt::Write;

use crate::experiment::FrequencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LawChoice {
    TwoSteps,
    Sigmoid,
    Both,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn with_margin(lo: f64, hi: f64) -> (f64, f64) {
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn polyline(frame: &Frame, points: &[(f64, f64)], color: &str, dash: Option<&str>) -> String {
    let coords: Vec<String> = points
        .iter()
        .filter(|(_, y)| y.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let dash = dash
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

pub fn comparison_svg(table: &FrequencyTable, law: LawChoice, title: &str) -> String {
    let hs: Vec<f64> = table.rows.iter().map(|r| r.h).collect();
    let lo = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = with_margin(lo, hi);
    let (y_min, y_max) = with_margin(0.0, 1.0);
    let frame = Frame {
        x_min,
        x_max,
        y_min,
        y_max,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );

    // axes
    let (x0, x1) = (frame.px(x_min), frame.px(x_max));
    let (y0, y1) = (frame.py(y_min), frame.py(y_max));
    let _ = writeln!(
        svg,
        "<path d=\"M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let py = frame.py(y);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0:.2}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y:.1}</text>",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    for i in 0..=5 {
        let x = lo + (hi - lo) * i as f64 / 5.0;
        let px = frame.px(x);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x:.3}</text>",
            y0 + 5.0,
            y0 + 20.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">h</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">P(err_m &lt;= err_k)</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let freq: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.h, r.frequency)).collect();
    svg.push_str(&polyline(&frame, &freq, "#1f4e9c", None));
    let mut legend = vec![("#1f4e9c", None, "empirical frequency")];
    if matches!(law, LawChoice::TwoSteps | LawChoice::Both) {
        let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.h, r.two_steps)).collect();
        svg.push_str(&polyline(&frame, &pts, "#c0392b", Some("2,4")));
        legend.push(("#c0392b", Some("2,4"), "two-steps law"));
    }
    if matches!(law, LawChoice::Sigmoid | LawChoice::Both) {
        let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.h, r.sigmoid)).collect();
        svg.push_str(&polyline(&frame, &pts, "#27ae60", Some("2,4")));
        legend.push(("#27ae60", Some("2,4"), "sigmoid law"));
    }

    match table.h_star {
        Some(hs) if hs >= x_min && hs <= x_max => {
            let px = frame.px(hs);
            let _ = writeln!(
                svg,
                "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{y1:.2}\" stroke=\"gray\" stroke-dasharray=\"6,4\"/><text x=\"{:.2}\" y=\"{:.2}\" fill=\"gray\">h* = {hs:.4}</text>",
                px + 4.0,
                y1 + 12.0
            );
        }
        Some(hs) => {
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"gray\">h* = {hs:.4} (off scale)</text>",
                x1,
                y1 + 12.0
            );
        }
        None => {}
    }

    for (i, (color, dash, label)) in legend.iter().enumerate() {
        let y = y0 - 60.0 + 16.0 * i as f64;
        let lx = x1 - 170.0;
        let dash = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/><text x=\"{:.2}\" y=\"{:.2}\">{label}</text>",
            lx + 30.0,
            lx + 36.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::FrequencyRow;
    use relacc_core::laws::BoundCoefficient;

    fn table(h_star: Option<f64>) -> FrequencyTable {
        let rows = [0.05, 0.1, 0.15]
            .iter()
            .map(|&h| FrequencyRow {
                h,
                n_effective: 10,
                n_failed: 0,
                frequency: 1.0 - h * 4.0,
                two_steps: if h < 0.1 { 1.0 } else { 0.0 },
                sigmoid: 0.5,
            })
            .collect();
        let coef = |degree| BoundCoefficient {
            degree,
            value: 1.0,
            sample_count: 30,
        };
        FrequencyTable {
            k: 2,
            m: 3,
            rows,
            h_star,
            coef_k: coef(2),
            coef_m: coef(3),
        }
    }

    #[test]
    fn draws_frequency_solid_and_laws_dotted() {
        let svg = comparison_svg(&table(Some(0.1)), LawChoice::Both, "P2 vs P3 <runge>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(
            svg.matches("<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points").count(),
            1
        );
        assert!(svg.contains("h* = 0.1000"));
        assert!(svg.contains("&lt;runge&gt;"));
    }

    #[test]
    fn single_law_and_off_scale_marker() {
        let svg = comparison_svg(&table(Some(3.0)), LawChoice::Sigmoid, "t");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("(off scale)"));
        let svg = comparison_svg(&table(None), LawChoice::TwoSteps, "t");
        assert!(!svg.contains("h* ="));
    }
}
