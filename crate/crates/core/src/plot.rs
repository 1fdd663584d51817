//! Static SVG line charts of sweep results.

use std::fmt::Write as _;

use crate::harness::SweepRow;

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

type Metric = fn(&SweepRow) -> f64;

fn policies_in_order(rows: &[SweepRow]) -> Vec<&str> {
    let mut seen: Vec<&str> = Vec::new();
    for r in rows {
        if !seen.contains(&r.policy.as_str()) {
            seen.push(&r.policy);
        }
    }
    seen
}

/// Upper axis bound rounded to a 1-2-5 step.
fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for step in [1.0, 2.0, 5.0, 10.0] {
        if v <= step * mag {
            return step * mag;
        }
    }
    10.0 * mag
}

fn panel(svg: &mut String, rows: &[SweepRow], top: f64, title: &str, metric: Metric, y_max: Option<f64>) {
    let x_min = rows.iter().map(|r| r.fraction).fold(f64::INFINITY, f64::min);
    let x_max = rows.iter().map(|r| r.fraction).fold(f64::NEG_INFINITY, f64::max);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_top = y_max.unwrap_or_else(|| nice_max(rows.iter().map(metric).fold(0.0, f64::max)));
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / x_span * plot_w;
    let sy = |y: f64| top + MARGIN_T + plot_h - y / y_top * plot_h;

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{title}</text>"#,
        MARGIN_L + plot_w / 2.0,
        top + 22.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{:.1}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##,
        top + MARGIN_T
    );
    for i in 0..=4 {
        let y = y_top * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            sy(y) + 3.0,
            trim(y)
        );
    }
    let mut fractions: Vec<f64> = rows.iter().map(|r| r.fraction).collect();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    let every = (fractions.len() / 7).max(1);
    for f in fractions.iter().step_by(every) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}%</text>"#,
            sx(*f),
            top + MARGIN_T + plot_h + 16.0,
            trim(f * 100.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">firewall percentage</text>"#,
        MARGIN_L + plot_w / 2.0,
        top + PANEL_H - 10.0
    );
    for (i, policy) in policies_in_order(rows).into_iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| format!("{:.2},{:.2}", sx(r.fraction), sy(metric(r))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + MARGIN_T + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_L + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{policy}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Stacked panels: outbreak probability, cluster count and largest cluster
/// size against firewall fraction, one line per policy.
pub fn render_sweep_svg(rows: &[SweepRow]) -> String {
    let panels: [(&str, Metric, Option<f64>); 3] = [
        ("Outbreak probability", |r| r.outbreak_probability, Some(1.0)),
        ("Mean number of clusters", |r| r.mean_num_clusters, None),
        ("Mean size of largest cluster", |r| r.mean_max_cluster_size, None),
    ];
    let height = PANEL_H * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !rows.is_empty() {
        for (i, (title, metric, y_max)) in panels.into_iter().enumerate() {
            panel(&mut svg, rows, PANEL_H * i as f64, title, metric, y_max);
        }
    }
    svg.push_str("</svg>\n");
    svg
}
