//! SVG DET plots on normal-deviate (probit) axes.

use spoofkit::metrics::DetCurve;
use statrs::distribution::{ContinuousCDF, Normal};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 60.0;
const P_LO: f64 = 0.0005;
const P_HI: f64 = 0.6;
const TICKS_PCT: [f64; 9] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0];
const COLOURS: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn probit(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p.clamp(P_LO, P_HI))
}

/// Axis position of a rate, in pixels from the plot origin.
fn scale(p: f64) -> f64 {
    let (lo, hi) = (probit(P_LO), probit(P_HI));
    (probit(p) - lo) / (hi - lo) * SIZE
}

/// Miss rate against false-alarm rate, one polyline per curve.
pub fn det_svg(title: &str, curves: &[(String, &DetCurve)]) -> String {
    let w = SIZE + 2.0 * MARGIN;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\" viewBox=\"0 0 {w} {w}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    s.push_str(&format!("<rect width=\"{w}\" height=\"{w}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        w / 2.0,
        MARGIN / 2.0,
        escape(title)
    ));
    let x = |p: f64| MARGIN + scale(p);
    let y = |p: f64| MARGIN + SIZE - scale(p);
    for t in TICKS_PCT {
        let p = t / 100.0;
        s.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1}\" x2=\"{0:.2}\" y2=\"{2}\" stroke=\"#ddd\"/>\n",
            x(p),
            MARGIN,
            MARGIN + SIZE
        ));
        s.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0:.2}\" x2=\"{2}\" y2=\"{0:.2}\" stroke=\"#ddd\"/>\n",
            y(p),
            MARGIN,
            MARGIN + SIZE
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{t}</text>\n",
            x(p),
            MARGIN + SIZE + 15.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{t}</text>\n",
            MARGIN - 5.0,
            y(p) + 4.0
        ));
    }
    s.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">False alarm rate [%]</text>\n",
        w / 2.0,
        w - 15.0
    ));
    s.push_str(&format!(
        "<text transform=\"translate(15 {}) rotate(-90)\" text-anchor=\"middle\">Miss rate [%]</text>\n",
        w / 2.0
    ));
    for (i, (name, c)) in curves.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let points: Vec<String> = (0..c.len())
            .map(|k| format!("{:.2},{:.2}", x(c.p_fa[k]), y(c.p_miss[k])))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN + 15.0 + 14.0 * i as f64;
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{ly}\" fill=\"{colour}\" text-anchor=\"end\">{}</text>\n",
            MARGIN + SIZE - 8.0,
            escape(name)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
