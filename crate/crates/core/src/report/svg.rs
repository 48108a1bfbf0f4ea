//! Minimal static SVG plotting for report panels.

use std::fmt::Write;

use crate::cluster::Dendrogram;
use crate::profile::RFormantProfile;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 320.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// A single panel with linear axes.
pub struct Panel {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let fix = |(a, b): (f64, f64)| if b - a < 1e-12 { (a - 0.5, b + 0.5) } else { (a, b) };
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range: fix(x_range),
            y_range: fix(y_range),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        MARGIN_L + (x - a) / (b - a) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        HEIGHT - MARGIN_B - (y - a) / (b - a) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    pub fn polyline(&mut self, xs: &[f64], ys: &[f64], color: &str) -> &mut Self {
        let mut pts = String::new();
        for (&x, &y) in xs.iter().zip(ys) {
            let _ = write!(pts, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.trim_end()
        );
        self
    }

    /// Vertical segments from `y0[i]` to `y1[i]` at `xs[i]`.
    pub fn ranges(&mut self, xs: &[f64], y0: &[f64], y1: &[f64], color: &str) -> &mut Self {
        let mut d = String::new();
        for ((&x, &a), &b) in xs.iter().zip(y0).zip(y1) {
            let _ = write!(d, "M{:.2} {:.2}V{:.2}", self.px(x), self.py(a), self.py(b));
        }
        let _ = writeln!(self.body, r#"<path stroke="{color}" stroke-width="1" d="{d}"/>"#);
        self
    }

    pub fn vlines(&mut self, xs: &[f64], color: &str) -> &mut Self {
        for &x in xs {
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
                MARGIN_T,
                HEIGHT - MARGIN_B,
                x = self.px(x)
            );
        }
        self
    }

    pub fn hline(&mut self, y: f64, color: &str) -> &mut Self {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            MARGIN_L,
            WIDTH - MARGIN_R,
            y = self.py(y)
        );
        self
    }

    /// Bars of equal width starting at `lo`, each `width` wide.
    pub fn bars(&mut self, lo: f64, width: f64, heights: &[f64], color: &str) -> &mut Self {
        for (i, &h) in heights.iter().enumerate() {
            let x0 = self.px(lo + i as f64 * width);
            let x1 = self.px(lo + (i + 1) as f64 * width);
            let y0 = self.py(0.0_f64.max(self.y_range.0));
            let y1 = self.py(h);
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" stroke="white"/>"#,
                x0,
                y1.min(y0),
                (x1 - x0).max(0.0),
                (y0 - y1).abs()
            );
        }
        self
    }

    pub fn points(&mut self, pts: &[(f64, f64)], color: &str) -> &mut Self {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                self.px(x),
                self.py(y)
            );
        }
        self
    }

    /// Grey-scale cells; `cells[row][col]` in `[0, 1]`, row 0 at the bottom.
    pub fn heatmap(&mut self, cells: &[Vec<f64>]) -> &mut Self {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return self;
        }
        let (x0, x1) = (self.px(self.x_range.0), self.px(self.x_range.1));
        let (y0, y1) = (self.py(self.y_range.0), self.py(self.y_range.1));
        let cw = (x1 - x0) / cols as f64;
        let ch = (y0 - y1) / rows as f64;
        for (r, row) in cells.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                    x0 + c as f64 * cw,
                    y0 - (r + 1) as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        s.push_str(&self.body);
        let (bx, by) = (MARGIN_L, MARGIN_T);
        let (bw, bh) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
        let _ = writeln!(
            s,
            r#"<rect x="{bx}" y="{by}" width="{bw}" height="{bh}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                self.px(xv),
                HEIGHT - MARGIN_B + 14.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_L - 4.0,
                self.py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + bw / 2.0,
            HEIGHT - 8.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            MARGIN_T + bh / 2.0,
            MARGIN_T + bh / 2.0,
            esc(&self.y_label)
        );
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Waveform as per-column min/max strokes with an envelope overlay.
pub fn waveform_with_envelope(
    title: &str,
    samples: &[f64],
    rate: f64,
    envelope: &[f64],
    envelope_rate: f64,
) -> String {
    let duration = samples.len() as f64 / rate;
    let mut p = Panel::new(title, "time (s)", "amplitude", (0.0, duration), (-1.0, 1.0));
    let cols = samples.len().clamp(1, 1200);
    let chunk = samples.len().div_ceil(cols).max(1);
    let (mut xs, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
    for (i, block) in samples.chunks(chunk).enumerate() {
        xs.push((i * chunk) as f64 / rate);
        lo.push(block.iter().copied().fold(f64::INFINITY, f64::min));
        hi.push(block.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    p.ranges(&xs, &lo, &hi, "#888888");
    let ex: Vec<f64> = (0..envelope.len()).map(|j| j as f64 / envelope_rate).collect();
    p.polyline(&ex, envelope, "#d62728");
    p.render()
}

/// Display spectrum with rhythm bars.
pub fn spectrum_with_bars(title: &str, freqs: &[f64], display: &[f64], bars: &[f64]) -> String {
    let (lo, hi) = extent(freqs.iter().copied());
    let (_, ymax) = extent(display.iter().copied());
    let mut p = Panel::new(title, "frequency (Hz)", "squared residual", (lo, hi), (0.0, ymax.max(1e-9)));
    p.vlines(bars, "#d62728");
    p.polyline(freqs, display, "#1f77b4");
    p.render()
}

pub fn bin_histogram(title: &str, profile: &RFormantProfile) -> String {
    let (lo, hi) = profile.band;
    let mut p = Panel::new(title, "frequency (Hz)", "weight", (lo, hi), (0.0, 1.0));
    p.bars(lo, (hi - lo) / profile.n_bins as f64, &profile.bins, "#2ca02c");
    p.render()
}

/// F0 track with unvoiced frames left as gaps.
pub fn f0_track(title: &str, values: &[f64], rate: f64) -> String {
    let duration = values.len() as f64 / rate;
    let (_, ymax) = extent(values.iter().copied());
    let mut p = Panel::new(title, "time (s)", "F0 (Hz)", (0.0, duration), (0.0, ymax.max(1.0) * 1.1));
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| (i as f64 / rate, v))
        .collect();
    p.points(&pts, "#1f77b4");
    p.render()
}

pub fn spectrogram(title: &str, cells: &[Vec<f64>], duration: f64, max_hz: f64) -> String {
    let mut p = Panel::new(title, "time (s)", "frequency (Hz)", (0.0, duration), (0.0, max_hz));
    p.heatmap(cells);
    p.render()
}

pub fn wagner_scatter(title: &str, pairs: &[(f64, f64)]) -> String {
    let (lo, hi) = extent(pairs.iter().flat_map(|&(a, b)| [a, b]));
    let r = lo.abs().max(hi.abs()) * 1.1;
    let mut p = Panel::new(title, "z(d_k)", "z(d_k+1)", (-r, r), (-r, r));
    p.hline(0.0, "#999999");
    p.vlines(&[0.0], "#999999");
    p.points(pairs, "#1f77b4");
    p.render()
}

/// Dendrogram with merge heights on the x axis and a bin histogram per leaf.
pub fn dendrogram(title: &str, tree: &Dendrogram, profiles: &[RFormantProfile]) -> String {
    let m = tree.leaf_count();
    let row_h = 36.0;
    let hist_w = 160.0;
    let label_w = 90.0;
    let left = 20.0;
    let tree_w = 300.0;
    let top = 40.0;
    let width = left + tree_w + label_w + hist_w + 30.0;
    let height = top + row_h * m as f64 + 40.0;
    let max_h = tree.merges.iter().map(|mg| mg.distance).fold(0.0, f64::max).max(1e-12);
    let order = tree.leaf_order();
    let mut y_of = vec![0.0; m + tree.merges.len()];
    for (row, &leaf) in order.iter().enumerate() {
        y_of[leaf] = top + row_h * (row as f64 + 0.5);
    }
    // x grows from the leaves (right) towards the root (left)
    let x_of = |h: f64| left + tree_w * (1.0 - h / max_h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        width / 2.0,
        esc(title)
    );
    for (k, mg) in tree.merges.iter().enumerate() {
        let node = m + k;
        let (yl, yr) = (y_of[mg.left], y_of[mg.right]);
        y_of[node] = (yl + yr) / 2.0;
        let x = x_of(mg.distance);
        let (xl, xr) = (x_of(tree.height(mg.left)), x_of(tree.height(mg.right)));
        let _ = writeln!(
            s,
            r#"<path fill="none" stroke="black" d="M{xl:.2} {yl:.2}H{x:.2}V{yr:.2}H{xr:.2}"/>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{:.1}">0</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        height - 12.0,
        left + tree_w,
        height - 12.0,
        tick(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">merge distance (max {})</text>"#,
        left + tree_w / 2.0,
        height - 12.0,
        tick(max_h)
    );
    for &leaf in &order {
        let y = y_of[leaf];
        let label = &tree.labels[leaf];
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            left + tree_w + 6.0,
            y + 4.0,
            esc(label)
        );
        if let Some(p) = profiles.iter().find(|p| &p.label == label) {
            let x0 = left + tree_w + label_w;
            let bw = hist_w / p.bins.len().max(1) as f64;
            for (i, &b) in p.bins.iter().enumerate() {
                let h = b * (row_h - 6.0);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="green"/>"#,
                    x0 + i as f64 * bw,
                    y + row_h / 2.0 - 3.0 - h,
                    bw - 1.0,
                    h
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
