//! Static SVG line charts of `Ps` with Wilson-interval whiskers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{SimError, SimResult};
use crate::table::{Row, Table};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Which column goes on the x axis; every other identifying column
/// separates series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartSpec {
    pub x: String,
    pub title: String,
}

impl Default for ChartSpec {
    fn default() -> Self {
        ChartSpec {
            x: "eta".into(),
            title: "Successful decoding probability".into(),
        }
    }
}

const IDENTITY: [&str; 7] = ["algo", "n", "k", "eps", "C1", "C2", "eta"];

fn series_label(row: &Row, x: &str) -> String {
    IDENTITY
        .iter()
        .filter(|&&c| c != x)
        .map(|&c| match c {
            "algo" => row.algo.clone(),
            _ => format!("{c}={}", row.value(c).unwrap()),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `table` as an SVG document. Output depends only on the inputs.
pub fn render_chart(table: &Table, spec: &ChartSpec) -> SimResult<String> {
    if table.rows.is_empty() {
        return Err(SimError::config("nothing to chart: table has no rows"));
    }
    if !IDENTITY.contains(&spec.x.as_str()) || spec.x == "algo" {
        return Err(SimError::config(format!("cannot chart against column {:?}", spec.x)));
    }
    let mut series: BTreeMap<String, Vec<(f64, f64, f64, f64)>> = BTreeMap::new();
    for row in &table.rows {
        let x = row.value(&spec.x).unwrap();
        let clamp = |v: f64| v.clamp(0.0, 1.0);
        series
            .entry(series_label(row, &spec.x))
            .or_default()
            .push((x, clamp(row.ps), clamp(row.ps_lo), clamp(row.ps_hi)));
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let xs = table.rows.iter().map(|r| r.value(&spec.x).unwrap());
    let (mut x_min, mut x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + (1.0 - y) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&spec.title)
    )
    .unwrap();

    for i in 0..=5 {
        let y = i as f64 / 5.0;
        writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#dddddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{y:.1}</text>"##,
            py(y),
            LEFT + plot_w,
            LEFT - 6.0,
            py(y) + 4.0
        )
        .unwrap();
    }
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + plot_h + 18.0,
            format_tick(x)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Ps</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (i, (label, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for &(x, _, lo, hi) in points {
            writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{color}" stroke-width="1"/>"#,
                px(x),
                py(lo),
                py(hi)
            )
            .unwrap();
        }
        let vertices: Vec<String> = points
            .iter()
            .map(|&(x, y, _, _)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            vertices.join(" ")
        )
        .unwrap();
        for &(x, y, _, _) in points {
            writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y)).unwrap();
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            lx + 16.0,
            lx + 20.0,
            ly + 4.0,
            escape(label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round())
    } else {
        format!("{x:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eta: f64, ps: f64) -> Row {
        Row {
            algo: "rcds1".into(),
            n: 200,
            k: 20,
            eps: 0.5,
            c1: 5.0,
            c2: 50,
            eta,
            h: 0,
            samples: 10,
            successes: 0,
            ps,
            ps_lo: ps - 0.1,
            ps_hi: ps + 0.1,
            mean_peel_recovered: 0.0,
        }
    }

    #[test]
    fn one_series_two_points() {
        let table = Table {
            config: Vec::new(),
            rows: vec![row(1.0, 0.2), row(2.0, 0.95)],
        };
        let svg = render_chart(&table, &ChartSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
        assert_eq!(svg, render_chart(&table, &ChartSpec::default()).unwrap());
    }

    #[test]
    fn whiskers_stay_in_unit_interval() {
        let table = Table {
            config: Vec::new(),
            rows: vec![row(1.0, 0.0), row(2.0, 1.0)],
        };
        let svg = render_chart(&table, &ChartSpec::default()).unwrap();
        // y = 1 maps to the top edge, y = 0 to the bottom edge.
        for y in svg.split("y2=\"").skip(1).map(|s| s.split('"').next().unwrap().parse::<f64>().unwrap()) {
            assert!((TOP - 1e-9..=HEIGHT - BOTTOM + 1e-9).contains(&y));
        }
    }

    #[test]
    fn empty_selection_is_an_error() {
        assert!(render_chart(&Table::default(), &ChartSpec::default()).is_err());
        let table = Table {
            config: Vec::new(),
            rows: vec![row(1.0, 0.5)],
        };
        assert!(render_chart(&table, &ChartSpec { x: "ps".into(), ..ChartSpec::default() }).is_err());
    }
}
