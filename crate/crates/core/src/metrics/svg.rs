//! Minimal SVG charts: ensemble fan chart, bar chart and heatmap.

use std::fmt::Write as _;

use super::{ContactMatrix, EnsembleSummary};

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x1, y1) = (
            if x1 > x0 { x1 } else { x0 + 1.0 },
            if y1 > y0 { y1 } else { y0 + 1.0 },
        );
        Frame { x0, x1, y0, y1 }
    }

    fn x(&self, v: f64) -> f64 {
        PAD + (v - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn y(&self, v: f64) -> f64 {
        H - PAD - (v - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            s,
            r#"<path d="M{p} {t} L{p} {b} L{r} {b}" stroke="black" fill="none"/>"#,
            p = PAD,
            t = PAD,
            b = H - PAD,
            r = W - PAD
        );
        for k in 0..=4 {
            let xv = self.x0 + (self.x1 - self.x0) * k as f64 / 4.0;
            let yv = self.y0 + (self.y1 - self.y0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                self.x(xv),
                H - PAD + 15.0,
                fmt_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                PAD - 4.0,
                self.y(yv) + 4.0,
                fmt_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 10.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
    }
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

fn band_path(f: &Frame, xs: &[f64], lo: &[f64], hi: &[f64]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in xs.iter().zip(hi).enumerate() {
        let _ = write!(
            d,
            "{}{:.2} {:.2} ",
            if i == 0 { "M" } else { "L" },
            f.x(*x),
            f.y(*y)
        );
    }
    for (x, y) in xs.iter().zip(lo).rev() {
        let _ = write!(d, "L{:.2} {:.2} ", f.x(*x), f.y(*y));
    }
    d.push('Z');
    d
}

/// Fan chart of one or more ensemble summaries: 95% and 50% bands with the
/// median line. With a single realization the bands collapse onto the line.
pub fn fan_chart(title: &str, ylabel: &str, series: &[&EnsembleSummary]) -> String {
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let pts = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, 0.0_f64, f64::MIN);
    for p in pts {
        x0 = x0.min(p.time);
        x1 = x1.max(p.time);
        y0 = y0.min(p.quantiles[0]);
        y1 = y1.max(p.quantiles[4]);
    }
    if x0 > x1 {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    let f = Frame::new(x0, x1, y0, y1);
    let mut s = header(title);
    f.axes(&mut s, "year relative to burn-in end", ylabel);
    if y0 < 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
            f.x(x0),
            f.x(x1),
            y = f.y(0.0)
        );
    }
    for (k, sum) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let xs: Vec<f64> = sum.points.iter().map(|p| p.time).collect();
        let q = |i: usize| {
            sum.points
                .iter()
                .map(|p| p.quantiles[i])
                .collect::<Vec<_>>()
        };
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="{c}" fill-opacity="0.15" stroke="none"/>"#,
            band_path(&f, &xs, &q(0), &q(4))
        );
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="{c}" fill-opacity="0.3" stroke="none"/>"#,
            band_path(&f, &xs, &q(1), &q(3))
        );
        let mut d = String::new();
        for (i, p) in sum.points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if i == 0 { "M" } else { "L" },
                f.x(p.time),
                f.y(p.median())
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{c}" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{c}">{} (n={})</text>"#,
            PAD + 10.0,
            PAD + 14.0 * (k as f64 + 1.0),
            escape(&sum.label),
            sum.realizations
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Vertical bar chart with one bar per label.
pub fn bar_chart(title: &str, ylabel: &str, labels: &[String], values: &[f64]) -> String {
    let n = labels.len().max(1);
    let top = values.iter().cloned().fold(0.0_f64, f64::max);
    let f = Frame::new(0.0, n as f64, 0.0, if top > 0.0 { top } else { 1.0 });
    let mut s = header(title);
    f.axes(&mut s, "age group", ylabel);
    let bw = (W - 2.0 * PAD) / n as f64;
    for (i, (l, v)) in labels.iter().zip(values).enumerate() {
        let x = PAD + bw * i as f64;
        let y = f.y(*v);
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="#1f77b4"/>"##,
            x + 1.0,
            bw - 2.0,
            (H - PAD - y).max(0.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="8">{}</text>"#,
            x + bw / 2.0,
            H - PAD + 26.0,
            escape(l)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of contact rates; darker is more contacts.
pub fn heatmap(title: &str, m: &ContactMatrix) -> String {
    let n = m.bins();
    let top = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m.rate(i, j))
        .fold(0.0_f64, f64::max);
    let mut s = header(title);
    let side = (H - 2.0 * PAD).min(W - 2.0 * PAD);
    let cell = side / n as f64;
    let x0 = (W - side) / 2.0;
    for i in 0..n {
        for j in 0..n {
            let v = if top > 0.0 { m.rate(i, j) / top } else { 0.0 };
            let shade = (255.0 * (1.0 - v.sqrt())).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},255)"/>"#,
                x0 + cell * j as f64,
                H - PAD - cell * (i as f64 + 1.0),
                cell,
                cell
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">contact age (bins of {} yr)</text>"#,
        W / 2.0,
        H - 20.0,
        m.bin_width()
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">participant age</text>"#,
        x0 - 10.0,
        H / 2.0,
        x0 - 10.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::TimeSeries;

    #[test]
    fn charts_are_well_formed() {
        let a = TimeSeries::new("a", vec![0.0, 1.0, 2.0], vec![1.0, -2.0, 3.0]).unwrap();
        let sum = EnsembleSummary::from_series("arm", &[a]).unwrap();
        let svg = fan_chart("t <x>", "rate", &[&sum]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("t &lt;x&gt;"));
        let bars = bar_chart("b", "y", &["0-1".into()], &[0.0]);
        assert!(bars.contains("<rect"));
        let hm = heatmap("h", &ContactMatrix::new(5.0, 3));
        assert_eq!(hm.matches("<rect").count(), 1 + 9);
    }
}
