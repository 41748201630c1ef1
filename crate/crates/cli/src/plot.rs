//! Line-plot SVG of adaptive-minus-parallel gaps from a result CSV.

use std::path::Path;

use crate::csvio::read_csv;
use crate::sweep::ResultRow;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt(v: f64) -> String {
    format!("{:.4}", v)
}

fn fmt_tick(v: f64) -> String {
    format!("{:.3e}", v)
}

/// Renders one polyline per channel-use count n, plotting the
/// adaptive-minus-parallel value difference against the swept parameter.
/// Deterministic output for identical input.
pub fn render_plot(csv_path: &Path, quantity: &str, out_svg: &Path) -> Result<(), CliError> {
    let rows = read_csv(csv_path)?;
    let rows: Vec<&ResultRow> = rows.iter().filter(|r| r.quantity == quantity).collect();
    if rows.is_empty() {
        return Err(CliError::Render(format!(
            "no rows for quantity '{quantity}' in {}",
            csv_path.display()
        )));
    }

    // The swept parameter is whichever key column varies.
    let varies = |get: fn(&ResultRow) -> f64| -> bool {
        let first = get(rows[0]);
        rows.iter().any(|r| get(r) != first)
    };
    let axis: (&str, fn(&ResultRow) -> f64) = if varies(|r| r.noise1) {
        ("noise", |r| r.noise1)
    } else if varies(|r| r.gamma1) {
        ("gamma", |r| r.gamma1)
    } else if varies(|r| r.noise2) {
        ("noise2", |r| r.noise2)
    } else if varies(|r| r.gamma2) {
        ("gamma2", |r| r.gamma2)
    } else {
        ("parameter", |r| r.noise1)
    };

    // Collect gap series per n.
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut xs: Vec<f64> = rows.iter().map(|r| axis.1(r)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    xs.dedup();

    let mut missing: Vec<String> = Vec::new();
    let mut series: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for &n in &ns {
        let mut pts = Vec::new();
        for &x in &xs {
            let find = |mode: &str| {
                rows.iter()
                    .find(|r| r.n == n && r.mode == mode && axis.1(r) == x)
                    .copied()
            };
            match (find("adaptive"), find("parallel")) {
                (Some(a), Some(p)) if a.value.is_finite() && p.value.is_finite() => {
                    pts.push((x, a.value - p.value));
                }
                (a, p) => {
                    if a.is_none() {
                        missing.push(format!("{quantity} n={n} {}={x} adaptive", axis.0));
                    }
                    if p.is_none() {
                        missing.push(format!("{quantity} n={n} {}={x} parallel", axis.0));
                    }
                    if a.is_some() && p.is_some() {
                        missing.push(format!(
                            "{quantity} n={n} {}={x} (non-finite value)",
                            axis.0
                        ));
                    }
                }
            }
        }
        series.push((n, pts));
    }
    if !missing.is_empty() {
        return Err(CliError::Render(format!(
            "missing cells for gap plot: {}",
            missing.join("; ")
        )));
    }

    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, pts) in &series {
        for &(_, y) in pts {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if y_lo == y_hi {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

    let px = |x: f64| MARGIN_L + (x - x_lo) / x_span * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B),
        fmt(WIDTH - MARGIN_R),
        fmt(HEIGHT - MARGIN_B)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(MARGIN_L),
        fmt(HEIGHT - MARGIN_B)
    ));
    // Tick labels at the extremes.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        fmt(px(x_lo)),
        fmt(HEIGHT - MARGIN_B + 16.0),
        fmt_tick(x_lo)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        fmt(px(x_hi)),
        fmt(HEIGHT - MARGIN_B + 16.0),
        fmt_tick(x_hi)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt(MARGIN_L - 6.0),
        fmt(py(y_lo)),
        fmt_tick(y_lo)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt(MARGIN_L - 6.0),
        fmt(py(y_hi)),
        fmt_tick(y_hi)
    ));
    // Axis titles.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        fmt(HEIGHT - 12.0),
        axis.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{} gap (adaptive - parallel)</text>\n",
        fmt((MARGIN_T + HEIGHT - MARGIN_B) / 2.0),
        fmt((MARGIN_T + HEIGHT - MARGIN_B) / 2.0),
        quantity
    ));
    // Series.
    for (si, (n, pts)) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(px(x)), fmt(py(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            coords.join(" ")
        ));
        for &(x, y) in pts {
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>\n",
                fmt(px(x)),
                fmt(py(y)),
                color
            ));
        }
        // Legend.
        let ly = MARGIN_T + 16.0 * si as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            fmt(WIDTH - MARGIN_R + 8.0),
            fmt(ly),
            fmt(WIDTH - MARGIN_R + 28.0),
            fmt(ly),
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">n = {}</text>\n",
            fmt(WIDTH - MARGIN_R + 34.0),
            fmt(ly + 4.0),
            n
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(out_svg, svg)?;
    Ok(())
}
