//! SVG rendering of a dimension-vs-p sweep: the curve, axes, and dashed
//! vertical lines at the phase transitions. Output bytes are deterministic.

use fracdim_core::special::TwoMapThresholds;

use crate::output::fmt_sig;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    y_max: f64,
}

impl Frame {
    fn x(&self, p: f64) -> f64 {
        LEFT + p * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = HEIGHT - TOP - BOTTOM;
        HEIGHT - BOTTOM - (v / self.y_max) * span
    }
}

fn coord(v: f64) -> String {
    format!("{:.2}", v)
}

/// Renders the sweep to a complete SVG document.
pub fn render_sweep(rows: &[(f64, f64)], s0: f64, thresholds: TwoMapThresholds) -> String {
    // headroom above the flat segment, rounded to a tenth for stable bytes
    let y_max = ((s0 * 1.15) * 10.0).ceil() / 10.0;
    let frame = Frame { y_max };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<!-- generator: fracdim svg v1 -->\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    let x0 = coord(frame.x(0.0));
    let x1 = coord(frame.x(1.0));
    let y0 = coord(frame.y(0.0));
    let y1 = coord(frame.y(y_max));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));

    // x ticks at 0, 1/2, 1; y ticks every 0.2
    for (p, label) in [(0.0, "0"), (0.5, "1/2"), (1.0, "1")] {
        let x = coord(frame.x(p));
        let yb = coord(frame.y(0.0) + 5.0);
        let yt = coord(frame.y(0.0));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{yt}\" x2=\"{x}\" y2=\"{yb}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
             text-anchor=\"middle\">{label}</text>\n",
            coord(frame.y(0.0) + 22.0)
        ));
    }
    let mut tick = 0.0;
    while tick <= y_max + 1e-9 {
        let y = coord(frame.y(tick));
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{x0}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
             text-anchor=\"end\">{}</text>\n",
            coord(frame.x(0.0) - 5.0),
            coord(frame.x(0.0) - 9.0),
            coord(frame.y(tick) + 5.0),
            fmt_sig(tick, 3)
        ));
        tick += 0.2;
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">p</text>\n",
        coord((frame.x(0.0) + frame.x(1.0)) / 2.0),
        coord(HEIGHT - 8.0)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">dimension</text>\n",
        coord((frame.y(0.0) + frame.y(y_max)) / 2.0),
        coord((frame.y(0.0) + frame.y(y_max)) / 2.0)
    ));

    // dashed threshold lines up to the curve height, as in the source figure
    let at = |p: f64| -> f64 {
        rows.iter()
            .min_by(|a, b| {
                (a.0 - p)
                    .abs()
                    .partial_cmp(&(b.0 - p).abs())
                    .expect("finite sweep values")
            })
            .map(|&(_, v)| v)
            .unwrap_or(s0)
    };
    for (p, label) in [
        (thresholds.p_lower, "p*"),
        (0.5, "1/2"),
        (thresholds.p_upper, "p^*"),
    ] {
        let x = coord(frame.x(p));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"blue\" \
             stroke-dasharray=\"6,4\"/>\n\
             <text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
             fill=\"blue\" text-anchor=\"middle\">{label}</text>\n",
            coord(frame.y(0.0)),
            coord(frame.y(at(p))),
            coord(frame.y(at(p)) - 6.0)
        ));
    }

    // the curve itself
    let points: Vec<String> = rows
        .iter()
        .map(|&(p, v)| format!("{},{}", coord(frame.x(p)), coord(frame.y(v))))
        .collect();
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    svg.push_str("</svg>\n");
    svg
}
