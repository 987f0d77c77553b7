//! CSV and SVG output for band sweeps.

use std::fmt::Write as _;

use junction_core::{SweepResult, SweepRow};

/// Fixed 17-significant-digit scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(n: usize) -> String {
    let mut cols = vec!["lambda".to_string(), "p".to_string()];
    for prefix in ["Re_S", "Im_S", "T"] {
        for i in 1..=n {
            for j in 1..=n {
                cols.push(format!("{prefix}_{i}{j}"));
            }
        }
    }
    cols.push("unitarity_defect".into());
    cols.push("flag".into());
    cols.join(",")
}

fn row(r: &SweepRow, n: usize) -> String {
    let mut fields = vec![number(r.lambda)];
    match r.smatrix() {
        Some(s) => {
            fields.push(number(s.momenta[0]));
            let m = &s.matrix;
            for part in [0, 1] {
                for i in 0..n {
                    for j in 0..n {
                        fields.push(number(if part == 0 {
                            m[(i, j)].re
                        } else {
                            m[(i, j)].im
                        }));
                    }
                }
            }
            let t = s.transmission();
            for i in 0..n {
                for j in 0..n {
                    fields.push(number(t[(i, j)]));
                }
            }
            fields.push(number(s.unitarity_defect()));
            fields.push("0".into());
        }
        None => {
            fields.extend(std::iter::repeat_n(number(f64::NAN), 1 + 3 * n * n + 1));
            fields.push("1".into());
        }
    }
    fields.join(",")
}

/// Header plus one row per grid point; `\n` line endings.
pub fn sweep_csv(result: &SweepResult, n_wires: usize) -> String {
    let mut out = header(n_wires);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&row(r, n_wires));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf",
];

/// Line plot of every `T_ij` against `λ`.
pub fn sweep_svg(result: &SweepResult, n_wires: usize) -> String {
    let lambdas: Vec<f64> = result.rows.iter().map(|r| r.lambda).collect();
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 0.5, lo + 0.5)
    } else {
        (0.0, 1.0)
    };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x = |l: f64| MARGIN_LEFT + (l - lo) / (hi - lo) * plot_w;
    let y = |t: f64| MARGIN_Y + (1.0 - t) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let l = lo + (hi - lo) * t;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{l:.3}</text>"#,
            x(l),
            HEIGHT - MARGIN_Y + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y(t) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">T</text>"#,
        MARGIN_Y + plot_h / 2.0,
        MARGIN_Y + plot_h / 2.0
    );

    let mut k = 0;
    for i in 0..n_wires {
        for j in 0..n_wires {
            let colour = PALETTE[k % PALETTE.len()];
            let points: Vec<String> = result
                .rows
                .iter()
                .filter_map(|r| r.smatrix().map(|s| (r.lambda, s.transmission()[(i, j)])))
                .map(|(l, t)| format!("{:.3},{:.3}", x(l), y(t)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
            let ly = MARGIN_Y + 14.0 + 16.0 * k as f64;
            let lx = WIDTH - MARGIN_RIGHT + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="2"/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{ly:.1}">T_{}{}</text>"#,
                lx + 26.0,
                i + 1,
                j + 1
            );
            k += 1;
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use junction_core::{Junction, Method};

    #[test]
    fn header_layout() {
        assert_eq!(
            header(2),
            "lambda,p,Re_S_11,Re_S_12,Re_S_21,Re_S_22,Im_S_11,Im_S_12,Im_S_21,Im_S_22,T_11,T_12,T_21,T_22,unitarity_defect,flag"
        );
    }

    #[test]
    fn rows_and_flags() {
        let j = Junction::prepare(&junction_core::builtin_example()).unwrap();
        let r = j.sweep(&[4.5, 5.0], Method::Exact).unwrap();
        let csv = sweep_csv(&r, 3);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        let ncol = header(3).split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == ncol));
        assert!(lines[1].ends_with(",0"));
        assert!(lines[2].ends_with(",1"));
        assert!(lines[2].contains("NaN"));
        assert_eq!(number(4.5), "4.5000000000000000e0");
    }

    #[test]
    fn svg_has_one_polyline_per_entry() {
        let j = Junction::prepare(&junction_core::builtin_example()).unwrap();
        let r = j.sweep(&[4.5, 4.6, 4.7], Method::Exact).unwrap();
        let svg = sweep_svg(&r, 3);
        assert_eq!(svg.matches("<polyline").count(), 9);
        assert!(svg.contains(">λ</text>") && svg.contains(">T</text>"));
        assert!(!svg.contains("href"));
    }
}
