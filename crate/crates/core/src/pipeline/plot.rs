//! Minimal SVG scatter: window start time against one channel, coloured by
//! label, one panel per source.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 50.0;

pub struct Panel<'a> {
    pub title: &'a str,
    /// `(time, value, label)`
    pub points: Vec<(f64, f64, usize)>,
}

pub fn scatter_svg(panels: &[Panel<'_>], channel_name: &str, k: usize) -> String {
    let height = MARGIN + panels.len() as f64 * (PANEL_H + MARGIN) + 30.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let top = MARGIN + p as f64 * (PANEL_H + MARGIN);
        let (x0, x1) = extent(panel.points.iter().map(|q| q.0));
        let (y0, y1) = extent(panel.points.iter().map(|q| q.1));
        let plot_w = WIDTH - 2.0 * MARGIN;
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.1}">{}</text>"#, top - 8.0, escape(panel.title));
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{:.1}">{x0:.4}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{x1:.4}</text>"#,
            top + PANEL_H + 14.0,
            WIDTH - MARGIN,
            top + PANEL_H + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y1:.3}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{y0:.3}</text>"#,
            MARGIN - 4.0,
            top + 10.0,
            MARGIN - 4.0,
            top + PANEL_H
        );
        for &(t, v, label) in &panel.points {
            let cx = MARGIN + (t - x0) / (x1 - x0) * plot_w;
            let cy = top + PANEL_H - (v - y0) / (y1 - y0) * PANEL_H;
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="{}"/>"#, PALETTE[label % PALETTE.len()]);
        }
    }
    let legend_y = height - 18.0;
    let _ = write!(s, r#"<text x="{MARGIN}" y="{legend_y}">x: window start time, y: {}</text>"#, escape(channel_name));
    for label in 0..k {
        let x = WIDTH - MARGIN - (k - label) as f64 * 70.0;
        let _ = write!(
            s,
            r#"<circle cx="{x}" cy="{:.1}" r="4" fill="{}"/><text x="{:.1}" y="{legend_y}">label {label}</text>"#,
            legend_y - 4.0,
            PALETTE[label % PALETTE.len()],
            x + 8.0
        );
    }
    s.push_str("\n</svg>\n");
    s
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_circle_per_point() {
        let panels = [
            Panel { title: "a", points: vec![(0.0, 1.0, 0), (1.0, 2.0, 1)] },
            Panel { title: "b<c", points: vec![(5.0, 5.0, 1)] },
        ];
        let svg = scatter_svg(&panels, "x0", 2);
        assert_eq!(svg.matches("<circle").count(), 3 + 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
