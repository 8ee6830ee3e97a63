//! Self-contained SVG line charts of trace columns, one chart per column
//! group, stacked vertically in a single document. No rendering dependency.

use smartpack::trace::TraceRow;
use smartpack::{Error, Result};
use std::fmt::Write as _;

const CHART_W: f64 = 960.0;
const CHART_H: f64 = 220.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_V: f64 = 30.0;
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Default chart layout when no column selection is given.
pub fn default_groups() -> Vec<Vec<String>> {
    [
        vec!["tvbn_mg100g"],
        vec!["nh3_ppm", "butanone_ppm", "methylbutanol_ppm"],
        vec!["ca_headspace_ppm", "eg_headspace_ppm"],
        vec!["r_sensor_ohm"],
        vec!["f_res_mhz"],
        vec!["gain_db"],
        vec!["v_harvest_v"],
        vec!["temp_mat_c"],
        vec!["ca_released_frac", "eg_released_frac"],
    ]
    .into_iter()
    .map(|g| g.into_iter().map(str::to_string).collect())
    .collect()
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|i| lo + (hi - lo) * f64::from(i) / 4.0).collect()
}

/// Renders the selected column groups as stacked line charts.
pub fn render_svg(rows: &[TraceRow], groups: &[Vec<String>]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("empty trace".to_string()));
    }
    for group in groups {
        for col in group {
            if rows[0].column(col).is_none() {
                return Err(Error::invalid(format!("unknown trace column `{col}`")));
            }
        }
    }
    let stride = (rows.len() / MAX_POINTS).max(1);
    let t_max_h = rows.last().unwrap().t_s / 3600.0;

    let total_h = groups.len() as f64 * (CHART_H + MARGIN_V) + MARGIN_V;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{total_h:.0}\" \
         viewBox=\"0 0 {CHART_W} {total_h:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    for (gi, group) in groups.iter().enumerate() {
        let top = MARGIN_V + gi as f64 * (CHART_H + MARGIN_V);
        let plot_w = CHART_W - MARGIN_L - MARGIN_R;
        let plot_h = CHART_H - 40.0;

        // y range over the group's columns
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for col in group {
            for row in rows.iter().step_by(stride) {
                let v = row.column(col).unwrap();
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
        if !y_lo.is_finite() || y_lo == y_hi {
            y_hi = y_lo + 1.0;
            y_lo -= 1.0;
        }
        let pad = 0.05 * (y_hi - y_lo);
        let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

        let x_of = |t_s: f64| MARGIN_L + plot_w * (t_s / 3600.0) / t_max_h.max(1e-12);
        let y_of = |v: f64| top + plot_h - plot_h * (v - y_lo) / (y_hi - y_lo);

        // frame and ticks
        let _ = writeln!(
            svg,
            "<rect x=\"{MARGIN_L}\" y=\"{top:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
             fill=\"none\" stroke=\"#888\"/>"
        );
        for tick in nice_ticks(y_lo, y_hi) {
            let y = y_of(tick);
            let _ = writeln!(
                svg,
                "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\
                 <text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\" dy=\"3\">{tick:.3}</text>",
                MARGIN_L + plot_w,
                MARGIN_L - 6.0
            );
        }
        for tick in nice_ticks(0.0, t_max_h) {
            let x = MARGIN_L + plot_w * tick / t_max_h.max(1e-12);
            let _ = writeln!(
                svg,
                "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{tick:.1}</text>",
                top + plot_h + 16.0
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">time (h)</text>",
            MARGIN_L + plot_w / 2.0,
            top + plot_h + 32.0
        );

        for (ci, col) in group.iter().enumerate() {
            let color = PALETTE[ci % PALETTE.len()];
            let mut points = String::new();
            for row in rows.iter().step_by(stride) {
                let _ = write!(
                    points,
                    "{:.1},{:.1} ",
                    x_of(row.t_s),
                    y_of(row.column(col).unwrap())
                );
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                points.trim_end()
            );
            // legend entry
            let ly = top + 12.0 + ci as f64 * 16.0;
            let lx = MARGIN_L + plot_w + 12.0;
            let _ = writeln!(
                svg,
                "<line x1=\"{lx}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
                 stroke=\"{color}\" stroke-width=\"3\"/>\
                 <text x=\"{:.1}\" y=\"{ly:.1}\" dy=\"4\">{col}</text>",
                lx + 18.0,
                lx + 24.0
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
