//! Self-contained SVG line plots of aggregate curves.
//!
//! One plot shows one metric: a mean line per strategy (marked
//! `class="series"`) over a shaded ±1 SEM band, with axes, ticks, and a
//! legend. No external assets; the text is plain SVG 1.1 and parses with any
//! XML reader.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{AggregateCurve, MetricKind};
use crate::scoring::StrategyKind;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;

/// Stable per-strategy colors (keyed by canonical strategy order, so a
/// strategy keeps its color across plots and runs).
fn color_of(strategy: StrategyKind) -> &'static str {
    const PALETTE: [&str; 6] = [
        "#1f77b4", // obus_full
        "#2ca02c", // obus_no_freq
        "#9467bd", // obus_no_discovery
        "#8c564b", // obus_base_only
        "#ff7f0e", // uncertainty
        "#d62728", // random
    ];
    let pos = StrategyKind::all().iter().position(|&s| s == strategy).expect("known strategy");
    PALETTE[pos]
}

/// Round a raw step up to a pleasant 1/2/5 x 10^k value.
fn nice_step(raw: f64) -> f64 {
    debug_assert!(raw > 0.0);
    let mag = 10.0_f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Compact tick label (avoids "800.000"-style noise on axes).
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e6 || v.abs() < 1e-3 {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the curves for `metric` as an SVG document string.
///
/// Curves for other metrics are ignored; at least one curve for the requested
/// metric must be present.
pub fn render_plot(curves: &[AggregateCurve], metric: MetricKind) -> Result<String> {
    let series: Vec<&AggregateCurve> = curves.iter().filter(|c| c.metric == metric).collect();
    if series.is_empty() {
        return Err(Error::UnknownMetric(format!("no curves for metric {}", metric.label())));
    }

    let max_round = series.iter().flat_map(|c| c.rounds.iter().copied()).max().unwrap_or(0);
    let mut y_max = 0.0_f64;
    for c in &series {
        for i in 0..c.rounds.len() {
            y_max = y_max.max(c.mean[i] + c.sem[i]);
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    y_max *= 1.05;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |round: f64| MARGIN_LEFT + plot_w * round / (max_round.max(1) as f64);
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / y_max);
    let fmt = |v: f64| format!("{v:.2}");

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!("<title>{}</title>\n", xml_escape(metric.axis_label())));
    svg.push_str(&format!(
        "<desc>{} per round: mean line with a one-standard-error band over trials.</desc>\n",
        xml_escape(metric.axis_label())
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // Gridlines and y ticks.
    let y_step = nice_step(y_max / 5.0);
    let mut v = 0.0;
    while v <= y_max + 1e-9 {
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt(MARGIN_LEFT),
            fmt(WIDTH - MARGIN_RIGHT)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#333333\">{}</text>\n",
            fmt(MARGIN_LEFT - 8.0),
            y + 4.0,
            tick_label(v)
        ));
        v += y_step;
    }

    // X ticks at nice integer rounds.
    let x_step = nice_step(max_round.max(1) as f64 / 8.0).max(1.0);
    let mut r = 0.0;
    while r <= max_round as f64 + 1e-9 {
        let x = x_of(r);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
            fmt(HEIGHT - MARGIN_BOTTOM),
            fmt(HEIGHT - MARGIN_BOTTOM + 5.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" fill=\"#333333\">{}</text>\n",
            fmt(HEIGHT - MARGIN_BOTTOM + 20.0),
            tick_label(r)
        ));
        r += x_step;
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n\
         <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n",
        l = fmt(MARGIN_LEFT),
        t = fmt(MARGIN_TOP),
        b = fmt(HEIGHT - MARGIN_BOTTOM),
        r = fmt(WIDTH - MARGIN_RIGHT),
    ));
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" fill=\"#111111\" font-size=\"15\">round</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        fmt(HEIGHT - 12.0)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#111111\" font-size=\"15\" \
         transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        xml_escape(metric.axis_label())
    ));

    // SEM bands first (under the lines).
    for c in &series {
        if c.rounds.is_empty() || c.sem.iter().all(|&s| s == 0.0) {
            continue;
        }
        let mut points = String::new();
        for i in 0..c.rounds.len() {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(c.rounds[i] as f64),
                y_of((c.mean[i] + c.sem[i]).min(y_max))
            ));
        }
        for i in (0..c.rounds.len()).rev() {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(c.rounds[i] as f64),
                y_of((c.mean[i] - c.sem[i]).max(0.0))
            ));
        }
        svg.push_str(&format!(
            "<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
            points.trim_end(),
            color_of(c.strategy)
        ));
    }

    // Mean lines.
    for c in &series {
        if c.rounds.is_empty() {
            continue;
        }
        let points: Vec<String> = (0..c.rounds.len())
            .map(|i| format!("{:.2},{:.2}", x_of(c.rounds[i] as f64), y_of(c.mean[i].min(y_max))))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"series\" data-strategy=\"{}\" points=\"{}\" fill=\"none\" \
             stroke=\"{}\" stroke-width=\"1.8\"/>\n",
            c.strategy.label(),
            points.join(" "),
            color_of(c.strategy)
        ));
    }

    // Legend, top-right inside the plot area.
    let legend_x = WIDTH - MARGIN_RIGHT - 190.0;
    let mut legend_y = MARGIN_TOP + 14.0;
    for c in &series {
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"2.5\"/>\n",
            legend_x,
            legend_y - 4.0,
            legend_x + 26.0,
            legend_y - 4.0,
            color_of(c.strategy)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#111111\">{}</text>\n",
            legend_x + 34.0,
            legend_y,
            c.strategy.label()
        ));
        legend_y += 19.0;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write one metric's plot.
pub fn write_plot(curves: &[AggregateCurve], metric: MetricKind, path: &Path) -> Result<()> {
    let svg = render_plot(curves, metric)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(svg.as_bytes()).map_err(|e| Error::io(path, e))
}
