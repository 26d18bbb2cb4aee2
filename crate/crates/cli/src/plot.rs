//! Static SVG views of 1-D and 2-D embeddings.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Result};
use lrdpg::eval::pearson;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct PlotInput<'a> {
    pub coords: &'a [Vec<f64>],
    /// Community per row and the community names, if known.
    pub labels: Option<(&'a [usize], &'a [String])>,
    /// Degree per row, if the graph is known.
    pub degrees: Option<&'a [usize]>,
    pub title: &'a str,
}

#[derive(Debug)]
pub struct Plot {
    pub svg: String,
    /// Correlation between degree and distance from the origin, when
    /// degrees were given.
    pub degree_correlation: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps `[lo, hi]` onto `[a, b]`, padding a degenerate range.
fn scale(lo: f64, hi: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let (lo, hi) = if hi - lo > 0.0 { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    move |x| a + (x - lo) / (hi - lo) * (b - a)
}

/// Strip plot for `d = 1` (one band per community, coordinate on the x
/// axis) or scatter plot for `d = 2`. The origin is drawn as a cross.
pub fn render(input: &PlotInput<'_>) -> Result<Plot> {
    let n = input.coords.len();
    ensure!(n > 0, "embedding is empty");
    let d = input.coords[0].len();
    if input.coords.iter().any(|r| r.len() != d) {
        bail!("embedding rows have different lengths");
    }
    match d {
        1 | 2 => {}
        0 => bail!("embedding has no coordinates"),
        _ => bail!("cannot plot d = {d}; project the embedding onto two coordinates first"),
    }
    if let Some((l, _)) = input.labels {
        ensure!(l.len() == n, "{} labels for {n} embedded nodes", l.len());
    }
    let degree_correlation = match input.degrees {
        Some(deg) => {
            ensure!(deg.len() == n, "{} degrees for {n} embedded nodes", deg.len());
            let x: Vec<f64> = deg.iter().map(|&k| k as f64).collect();
            let r: Vec<f64> = input.coords.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
            pearson(&x, &r).ok()
        }
        None => None,
    };

    let group = |i: usize| input.labels.map_or(0, |(l, _)| l[i]);
    let groups = input.labels.map_or(1, |(_, names)| names.len().max(1));
    let xs: Vec<f64> = input.coords.iter().map(|c| c[0]).collect();
    let (xlo, xhi) = bounds(xs.iter().copied().chain([0.0]));
    let sx = scale(xlo, xhi, MARGIN, WIDTH - MARGIN);
    let (ys, sy): (Vec<f64>, Box<dyn Fn(f64) -> f64>) = if d == 2 {
        let ys: Vec<f64> = input.coords.iter().map(|c| c[1]).collect();
        let (ylo, yhi) = bounds(ys.iter().copied().chain([0.0]));
        (ys, Box::new(scale(ylo, yhi, HEIGHT - MARGIN, MARGIN)))
    } else {
        // Community band plus a deterministic jitter so points do not stack.
        let ys = (0..n)
            .map(|i| {
                let jitter = ((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64 / (1u64 << 53) as f64;
                group(i) as f64 + 0.7 * (jitter - 0.5)
            })
            .collect();
        (ys, Box::new(scale(-0.5, groups as f64 - 0.5, HEIGHT - MARGIN, MARGIN)))
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(input.title)
    )?;
    let (ox, oy) = (sx(0.0), if d == 2 { sy(0.0) } else { HEIGHT / 2.0 });
    if d == 2 {
        writeln!(svg, r##"<line x1="{}" y1="{oy:.2}" x2="{}" y2="{oy:.2}" stroke="#bbb"/>"##, MARGIN, WIDTH - MARGIN)?;
    }
    writeln!(svg, r##"<line x1="{ox:.2}" y1="{}" x2="{ox:.2}" y2="{}" stroke="#bbb"/>"##, MARGIN, HEIGHT - MARGIN)?;
    writeln!(
        svg,
        r##"<path id="origin" d="M{:.2} {oy:.2} h12 M{ox:.2} {:.2} v12" stroke="black" stroke-width="2"/>"##,
        ox - 6.0,
        oy - 6.0
    )?;
    for i in 0..n {
        let c = PALETTE[group(i) % PALETTE.len()];
        writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}" fill-opacity="0.7"/>"#,
            sx(xs[i]),
            sy(ys[i])
        )?;
    }
    if let Some((_, names)) = input.labels {
        for (g, name) in names.iter().enumerate() {
            let y = 44.0 + 16.0 * g as f64;
            writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
                WIDTH - MARGIN - 100.0,
                y - 4.0,
                PALETTE[g % PALETTE.len()],
                WIDTH - MARGIN - 90.0,
                y,
                escape(name)
            )?;
        }
    }
    if let Some(r) = degree_correlation {
        writeln!(
            svg,
            r#"<text id="degree-correlation" x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">corr(degree, distance from origin) = {r:.3}</text>"#,
            HEIGHT - 12.0
        )?;
    }
    writeln!(svg, "</svg>")?;
    Ok(Plot { svg, degree_correlation })
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_plot_annotates_correlation() {
        let coords = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let names = vec!["a".to_string(), "b".to_string()];
        let labels = [0, 0, 1, 1];
        let degrees = [4, 2, 2, 4];
        let plot = render(&PlotInput {
            coords: &coords,
            labels: Some((&labels, &names)),
            degrees: Some(&degrees),
            title: "x & y",
        })
        .unwrap();
        assert!((plot.degree_correlation.unwrap() - 1.0).abs() < 1e-12);
        assert!(plot.svg.contains("x &amp; y"));
        assert!(plot.svg.contains("= 1.000"));
    }

    #[test]
    fn rejects_bad_shapes() {
        let three = vec![vec![0.0, 1.0, 2.0]];
        let input = |c| PlotInput { coords: c, labels: None, degrees: None, title: "" };
        assert!(render(&input(&three)).unwrap_err().to_string().contains("project"));
        assert!(render(&input(&[])).is_err());
    }
}
