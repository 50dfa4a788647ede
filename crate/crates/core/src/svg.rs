//! Minimal static SVG figures: heatmap, histogram panels, grouped bars,
//! boxplots and scatter plots. Output is plain text built from rects, lines,
//! paths and labels, and is deterministic for equal input.

use std::fmt::Write as _;

use crate::compare::Quartiles;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const PALETTE: [&str; 6] = [
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(w: f64, h: f64, title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"18\" text-anchor=\"middle\" {FONT} font-size=\"14\">{}</text>",
        w / 2.0,
        esc(title)
    )
    .unwrap();
    s
}

fn text(s: &mut String, x: f64, y: f64, anchor: &str, label: &str) {
    writeln!(
        s,
        "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
        esc(label)
    )
    .unwrap();
}

fn line(s: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
    writeln!(
        s,
        "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"{stroke}\"/>"
    )
    .unwrap();
}

fn rect(s: &mut String, x: f64, y: f64, w: f64, h: f64, fill: &str) {
    writeln!(
        s,
        "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\"/>",
        w.max(0.0),
        h.max(0.0)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

/// Linear map from data range to pixel range with degenerate ranges widened.
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Scale {
        let (lo, hi) = if (hi - lo).abs() < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        Scale {
            d0: lo,
            d1: hi,
            p0,
            p1,
        }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn finite_range<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
}

fn y_axis(s: &mut String, sc: &Scale, x: f64) {
    line(s, x, sc.p0, x, sc.p1, "#333");
    for i in 0..=4 {
        let v = sc.d0 + (sc.d1 - sc.d0) * i as f64 / 4.0;
        let y = sc.at(v);
        line(s, x - 4.0, y, x, y, "#333");
        text(s, x - 6.0, y + 4.0, "end", &tick(v));
    }
}

/// Square matrix with white (0) to dark (`max`) cells, values printed inside.
pub fn heatmap(title: &str, labels: &[usize], matrix: &[f64], max: f64) -> String {
    let k = labels.len();
    let cell = 44.0;
    let (left, top) = (50.0, 40.0);
    let size = cell * k as f64;
    let mut s = open(left + size + 20.0, top + size + 40.0, title);
    let max = if max > 0.0 { max } else { 1.0 };
    for a in 0..k {
        for b in 0..k {
            let v = matrix[a * k + b];
            let t = (v / max).clamp(0.0, 1.0);
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let fill = format!("#{:02x}{:02x}ff", shade, shade);
            let (x, y) = (left + b as f64 * cell, top + a as f64 * cell);
            rect(&mut s, x, y, cell, cell, &fill);
            let anchor_color = if t > 0.5 { "white" } else { "black" };
            writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT} font-size=\"9\" fill=\"{anchor_color}\">{:.2}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 3.0,
                v
            )
            .unwrap();
        }
        let c = left + a as f64 * cell + cell / 2.0;
        text(
            &mut s,
            c,
            top + size + 14.0,
            "middle",
            &labels[a].to_string(),
        );
        text(
            &mut s,
            left - 6.0,
            top + a as f64 * cell + cell / 2.0 + 4.0,
            "end",
            &labels[a].to_string(),
        );
    }
    text(&mut s, left + size / 2.0, top + size + 32.0, "middle", "n");
    s.push_str("</svg>\n");
    s
}

/// One histogram panel per labelled group on a shared x range.
pub fn histograms(title: &str, groups: &[(String, Vec<f64>)], bins: usize) -> String {
    let bins = bins.max(1);
    let cols = 3usize;
    let rows = groups.len().div_ceil(cols).max(1);
    let (pw, ph) = (220.0, 140.0);
    let mut s = open(cols as f64 * pw + 20.0, rows as f64 * ph + 40.0, title);
    let Some((lo, hi)) = finite_range(groups.iter().flat_map(|g| g.1.iter())) else {
        s.push_str("</svg>\n");
        return s;
    };
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    for (idx, (label, values)) in groups.iter().enumerate() {
        let ox = 10.0 + (idx % cols) as f64 * pw;
        let oy = 30.0 + (idx / cols) as f64 * ph;
        let mut counts = vec![0usize; bins];
        for v in values.iter().filter(|v| v.is_finite()) {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let (x0, x1, y0, y1) = (ox + 30.0, ox + pw - 10.0, oy + ph - 30.0, oy + 15.0);
        let bw = (x1 - x0) / bins as f64;
        for (b, &c) in counts.iter().enumerate() {
            let h = (y0 - y1) * c as f64 / top;
            rect(&mut s, x0 + b as f64 * bw, y0 - h, bw - 1.0, h, PALETTE[0]);
        }
        line(&mut s, x0, y0, x1, y0, "#333");
        text(&mut s, (x0 + x1) / 2.0, oy + 10.0, "middle", label);
        text(&mut s, x0, y0 + 14.0, "start", &tick(lo));
        text(&mut s, x1, y0 + 14.0, "end", &tick(hi));
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bar chart. Bars taller than `cap` are drawn at the cap with a
/// marker; the underlying data is not altered.
pub fn bar_chart(
    title: &str,
    categories: &[String],
    series: &[(String, Vec<f64>)],
    cap: Option<f64>,
) -> String {
    let group_w = 24.0 * series.len().max(1) as f64 + 16.0;
    let (left, top, plot_h) = (60.0, 40.0, 260.0);
    let width = left + group_w * categories.len() as f64 + 150.0;
    let mut s = open(width, top + plot_h + 70.0, title);
    let data_max =
        finite_range(series.iter().flat_map(|x| x.1.iter())).map_or(1.0, |r| r.1.max(0.0));
    let ymax = cap.map_or(data_max, |c| c.min(data_max)).max(1e-12);
    let sc = Scale::new(0.0, ymax, top + plot_h, top);
    y_axis(&mut s, &sc, left);
    for (c, cat) in categories.iter().enumerate() {
        let gx = left + 8.0 + c as f64 * group_w;
        for (k, (_, vals)) in series.iter().enumerate() {
            let v = vals.get(c).copied().unwrap_or(f64::NAN);
            if !v.is_finite() {
                continue;
            }
            let shown = v.min(ymax);
            let y = sc.at(shown);
            let x = gx + k as f64 * 24.0;
            rect(
                &mut s,
                x,
                y,
                22.0,
                top + plot_h - y,
                PALETTE[k % PALETTE.len()],
            );
            if v > ymax {
                text(&mut s, x + 11.0, y - 3.0, "middle", "^");
            }
        }
        writeln!(
            s,
            "<text transform=\"translate({:.1},{:.1}) rotate(40)\" {FONT}>{}</text>",
            gx,
            top + plot_h + 12.0,
            esc(cat)
        )
        .unwrap();
    }
    line(
        &mut s,
        left,
        top + plot_h,
        width - 150.0,
        top + plot_h,
        "#333",
    );
    for (k, (name, _)) in series.iter().enumerate() {
        let y = top + 10.0 + k as f64 * 16.0;
        rect(
            &mut s,
            width - 140.0,
            y - 9.0,
            10.0,
            10.0,
            PALETTE[k % PALETTE.len()],
        );
        text(&mut s, width - 125.0, y, "start", name);
    }
    s.push_str("</svg>\n");
    s
}

/// Box-and-whisker plot; whiskers span min to max.
pub fn boxplot(title: &str, boxes: &[(String, Quartiles)]) -> String {
    let (left, top, plot_h, bw) = (60.0, 40.0, 260.0, 36.0);
    let width = left + bw * boxes.len() as f64 + 20.0;
    let mut s = open(width.max(200.0), top + plot_h + 80.0, title);
    let range = finite_range(
        boxes
            .iter()
            .flat_map(|b| [b.1.min, b.1.max])
            .collect::<Vec<_>>()
            .iter(),
    )
    .unwrap_or((0.0, 1.0));
    let sc = Scale::new(range.0, range.1, top + plot_h, top);
    y_axis(&mut s, &sc, left);
    for (i, (label, q)) in boxes.iter().enumerate() {
        let cx = left + bw * (i as f64 + 0.5);
        let color = PALETTE[i % 2];
        line(&mut s, cx, sc.at(q.min), cx, sc.at(q.max), "#333");
        let (y3, y1) = (sc.at(q.q3), sc.at(q.q1));
        writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{y3:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{color}\" stroke=\"#333\"/>",
            cx - bw * 0.35,
            bw * 0.7,
            (y1 - y3).max(0.5)
        )
        .unwrap();
        line(
            &mut s,
            cx - bw * 0.35,
            sc.at(q.median),
            cx + bw * 0.35,
            sc.at(q.median),
            "#000",
        );
        writeln!(
            s,
            "<text transform=\"translate({:.1},{:.1}) rotate(60)\" {FONT} font-size=\"9\">{}</text>",
            cx - 3.0,
            top + plot_h + 10.0,
            esc(label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter plot with an optional fitted line `y = a + b x`.
pub fn scatter(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    fit: Option<(f64, f64)>,
) -> String {
    let (left, top, pw, ph) = (60.0, 40.0, 360.0, 260.0);
    let mut s = open(left + pw + 20.0, top + ph + 50.0, title);
    let xr = finite_range(points.iter().map(|p| &p.0)).unwrap_or((0.0, 1.0));
    let yr = finite_range(points.iter().map(|p| &p.1)).unwrap_or((0.0, 1.0));
    let sx = Scale::new(xr.0, xr.1, left, left + pw);
    let sy = Scale::new(yr.0, yr.1, top + ph, top);
    y_axis(&mut s, &sy, left);
    line(&mut s, left, top + ph, left + pw, top + ph, "#333");
    text(&mut s, left, top + ph + 14.0, "middle", &tick(sx.d0));
    text(&mut s, left + pw, top + ph + 14.0, "middle", &tick(sx.d1));
    text(&mut s, left + pw / 2.0, top + ph + 34.0, "middle", x_label);
    writeln!(
        s,
        "<text transform=\"translate(14,{:.1}) rotate(-90)\" text-anchor=\"middle\" {FONT}>{}</text>",
        top + ph / 2.0,
        esc(y_label)
    )
    .unwrap();
    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        writeln!(
            s,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.6\"/>",
            sx.at(x),
            sy.at(y),
            PALETTE[0]
        )
        .unwrap();
    }
    if let Some((a, b)) = fit {
        let (x0, x1) = (sx.d0, sx.d1);
        let clampy = |y: f64| sy.at(y).clamp(top, top + ph);
        line(
            &mut s,
            sx.at(x0),
            clampy(a + b * x0),
            sx.at(x1),
            clampy(a + b * x1),
            PALETTE[1],
        );
    }
    s.push_str("</svg>\n");
    s
}
