//! Histograms and minimal standalone SVG charts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; empty when the input was empty.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed on the right.
    pub fn new(xs: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(invalid("bins", "must be at least 1"));
        }
        let finite: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Ok(Self {
                edges: Vec::new(),
                counts: Vec::new(),
            });
        }
        let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for v in finite {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{:.9e},{:.9e},{}", self.edges[i], self.edges[i + 1], c);
        }
        s
    }
}

/// Gaussian kernel density estimate with Silverman's bandwidth.
pub fn kde(xs: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return vec![0.0; grid.len()];
    }
    let m = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let h = (1.06 * sd * n.powf(-0.2)).max(1e-12);
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| xs.iter().map(|&x| (-0.5 * ((g - x) / h).powi(2)).exp()).sum::<f64>() * norm)
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
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

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Overlaid density histograms, one colour per series, with a KDE curve each.
pub fn histogram_svg(title: &str, series: &[(&str, &[f64])], bins: usize) -> Result<String> {
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, xs)| xs.iter().copied())
        .filter(|v| v.is_finite())
        .collect();
    let mut s = svg_open(title);
    let Some(shared) = Histogram::new(&all, bins)?.edges.first().copied() else {
        s.push_str("</svg>\n");
        return Ok(s);
    };
    let lo = shared;
    let hi = *Histogram::new(&all, bins)?.edges.last().expect("non-empty");
    let width = (hi - lo) / bins as f64;
    let colours = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
    let grid: Vec<f64> = (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
    let mut densities = Vec::new();
    let mut ymax: f64 = 0.0;
    for (_, xs) in series {
        let mut counts = vec![0u64; bins];
        let finite: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
        for &v in &finite {
            counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
        }
        let n = finite.len().max(1) as f64;
        let dens: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        let curve = kde(&finite, &grid);
        ymax = ymax
            .max(dens.iter().copied().fold(0.0, f64::max))
            .max(curve.iter().copied().fold(0.0, f64::max));
        densities.push((dens, curve));
    }
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let sx = |v: f64| PAD + (v - lo) / (hi - lo) * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - v / ymax * (H - 2.0 * PAD);
    for (k, ((name, _), (dens, curve))) in series.iter().zip(&densities).enumerate() {
        let c = colours[k % colours.len()];
        for (i, d) in dens.iter().enumerate() {
            let x0 = sx(lo + width * i as f64);
            let x1 = sx(lo + width * (i + 1) as f64);
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{c}" fill-opacity="0.35"/>"#,
                sy(*d),
                (x1 - x0).max(0.0),
                (H - PAD) - sy(*d)
            );
        }
        let pts: Vec<String> = grid
            .iter()
            .zip(curve)
            .map(|(g, d)| format!("{:.2},{:.2}", sx(*g), sy(*d)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" fill="{c}">{}</text>"#,
            W - PAD - 120.0,
            40.0 + 16.0 * k as f64,
            escape(name)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.0}">{lo:.4e}</text><text x="{:.0}" y="{:.0}" text-anchor="end">{hi:.4e}</text>"#,
        H - PAD + 16.0,
        W - PAD,
        H - PAD + 16.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Row-normalised heatmap of a confusion matrix with raw counts printed.
pub fn confusion_svg(title: &str, names: &[String], confusion: &[Vec<u64>]) -> String {
    let k = names.len().max(1);
    let mut s = svg_open(title);
    let cell = ((H - 2.0 * PAD - 40.0) / k as f64).min((W - 220.0) / k as f64);
    let (x0, y0) = (180.0, PAD + 20.0);
    for (i, row) in confusion.iter().enumerate() {
        let total: u64 = row.iter().sum();
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y0 + cell * (i as f64 + 0.55),
            escape(&names[i])
        );
        for (j, &c) in row.iter().enumerate() {
            let frac = if total > 0 { c as f64 / total as f64 } else { 0.0 };
            let shade = (255.0 * (1.0 - frac)).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({shade},{shade},255)" stroke="gray"/>"#,
                x0 + cell * j as f64,
                y0 + cell * i as f64
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{}">{c}</text>"#,
                x0 + cell * (j as f64 + 0.5),
                y0 + cell * (i as f64 + 0.55),
                if frac > 0.5 { "white" } else { "black" }
            );
        }
    }
    for (j, n) in names.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            x0 + cell * (j as f64 + 0.5),
            y0 + cell * k as f64 + 14.0,
            escape(n)
        );
    }
    s.push_str("</svg>\n");
    s
}
