//! Deterministic SVG 1.1 emission: per-state policy scatter panels and the
//! tournament bar chart with confidence whiskers.

use lola_core::games::{N_STATES, STATE_NAMES};
use lola_core::record::RunRecord;
use lola_core::tournament::Standing;
use std::fmt::Write as _;

const PANEL: f64 = 180.0;
const MARGIN: f64 = 36.0;
const GAP: f64 = 24.0;

fn f(x: f64) -> String {
    format!("{x:.2}")
}

/// One scatter panel per state: x = agent 1 probability, y = agent 2
/// probability, one point per run's final policy pair.
pub fn policy_scatter_svg(records: &[RunRecord], title: &str) -> String {
    let width = MARGIN * 2.0 + PANEL * N_STATES as f64 + GAP * (N_STATES as f64 - 1.0);
    let height = MARGIN * 2.0 + PANEL + 24.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">",
        f(width),
        f(height),
        f(width),
        f(height)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{title}</text>",
        f(width / 2.0)
    );
    for s in 0..N_STATES {
        let x0 = MARGIN + s as f64 * (PANEL + GAP);
        let y0 = MARGIN;
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
             stroke=\"#444444\" stroke-width=\"1\"/>",
            f(x0),
            f(y0),
            f(PANEL),
            f(PANEL)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            f(x0 + PANEL / 2.0),
            f(y0 + PANEL + 16.0),
            STATE_NAMES[s]
        );
        // Quarter grid lines.
        for q in [0.25, 0.5, 0.75] {
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" \
                 stroke-width=\"0.5\"/>",
                f(x0 + q * PANEL),
                f(y0),
                f(x0 + q * PANEL),
                f(y0 + PANEL)
            );
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" \
                 stroke-width=\"0.5\"/>",
                f(x0),
                f(y0 + q * PANEL),
                f(x0 + PANEL),
                f(y0 + q * PANEL)
            );
        }
        for record in records {
            if let Some(last) = record.final_row() {
                let px = x0 + last.p1[s] * PANEL;
                let py = y0 + (1.0 - last.p2[s]) * PANEL;
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#4c78a8\" \
                     fill-opacity=\"0.65\"/>",
                    f(px),
                    f(py)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Bar chart of mean normalised returns per learner, 95% CI whiskers.
pub fn tournament_chart_svg(standings: &[Standing], title: &str) -> String {
    let n = standings.len().max(1);
    let bar_w = 56.0;
    let gap = 18.0;
    let plot_h = 240.0;
    let width = MARGIN * 2.0 + n as f64 * bar_w + (n as f64 - 1.0) * gap;
    let height = MARGIN * 2.0 + plot_h + 40.0;

    let lo = standings
        .iter()
        .map(|s| s.mean - s.ci95)
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let hi = standings
        .iter()
        .map(|s| s.mean + s.ci95)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let span = (hi - lo).max(1e-9);
    let y_of = |v: f64| MARGIN + (hi - v) / span * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">",
        f(width),
        f(height),
        f(width),
        f(height)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{title}</text>",
        f(width / 2.0)
    );
    // Zero line.
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\" stroke-width=\"1\"/>",
        f(MARGIN - 6.0),
        f(y_of(0.0)),
        f(width - MARGIN + 6.0),
        f(y_of(0.0))
    );
    for (i, s) in standings.iter().enumerate() {
        let x = MARGIN + i as f64 * (bar_w + gap);
        let y_top = y_of(s.mean.max(0.0));
        let y_bot = y_of(s.mean.min(0.0));
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4c78a8\"/>",
            f(x),
            f(y_top),
            f(bar_w),
            f((y_bot - y_top).max(0.5))
        );
        // CI whisker.
        let xc = x + bar_w / 2.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222222\" stroke-width=\"1.5\"/>",
            f(xc),
            f(y_of(s.mean + s.ci95)),
            f(xc),
            f(y_of(s.mean - s.ci95))
        );
        for dy in [s.mean + s.ci95, s.mean - s.ci95] {
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222222\" stroke-width=\"1.5\"/>",
                f(xc - 8.0),
                f(y_of(dy)),
                f(xc + 8.0),
                f(y_of(dy))
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            f(xc),
            f(MARGIN + plot_h + 16.0),
            s.name
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\">{:.2}</text>",
            f(xc),
            f(MARGIN + plot_h + 30.0),
            s.mean
        );
    }
    svg.push_str("</svg>\n");
    svg
}
