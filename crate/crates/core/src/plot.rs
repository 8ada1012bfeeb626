//! Deterministic SVG rendering: colored scatter diagnostics and score box
//! plots.

use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::pipeline::{median, quantile, ScoreTable};

/// Dark-to-bright color stops.
pub const PALETTE: [&str; 9] = [
    "#1b0c41", "#4a0c6b", "#781c6d", "#a52c60", "#cf4446", "#ed6925", "#fb9b06", "#f7d13d", "#fcffa4",
];

/// Maps an input-space row to a palette color.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ColorRule {
    /// Palette position given by the mean of the coordinates.
    MeanOfCoordinates,
    /// Darkest stop when every coordinate is at most `threshold`, brightest
    /// when every coordinate is at least `1 - threshold`, the middle stop
    /// otherwise.
    CornerBoxes { threshold: f64 },
}

impl Default for ColorRule {
    fn default() -> Self {
        ColorRule::MeanOfCoordinates
    }
}

impl ColorRule {
    pub fn palette_index(&self, row: &[f64]) -> usize {
        let last = PALETTE.len() - 1;
        match *self {
            ColorRule::MeanOfCoordinates => {
                let m = row.iter().sum::<f64>() / row.len() as f64;
                ((m.clamp(0.0, 1.0) * PALETTE.len() as f64).floor() as usize).min(last)
            }
            ColorRule::CornerBoxes { threshold } => {
                if row.iter().all(|&v| v <= threshold) {
                    0
                } else if row.iter().all(|&v| v >= 1.0 - threshold) {
                    last
                } else {
                    last / 2
                }
            }
        }
    }

    pub fn color(&self, row: &[f64]) -> &'static str {
        PALETTE[self.palette_index(row)]
    }

    /// One color per row of an input-space sample.
    pub fn colors(&self, x: ArrayView2<'_, f64>) -> Vec<&'static str> {
        x.rows().into_iter().map(|r| self.color(&r.to_vec())).collect()
    }
}

impl FromStr for ColorRule {
    type Err = Error;

    /// `mean`, `corner` (threshold 1/7) or `corner:<threshold>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "mean" => Ok(ColorRule::MeanOfCoordinates),
            "corner" => Ok(ColorRule::CornerBoxes { threshold: 1.0 / 7.0 }),
            _ => match s.strip_prefix("corner:").map(|t| t.parse::<f64>()) {
                Some(Ok(t)) if t > 0.0 && t < 0.5 => Ok(ColorRule::CornerBoxes { threshold: t }),
                _ => Err(Error::Config(format!(
                    "unknown color rule '{s}' (expected mean, corner or corner:<t> with 0<t<0.5)"
                ))),
            },
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Scatter plot of a sample in the unit square. `colors`, when given, holds
/// one color per row (normally computed from the input-space rows).
pub fn scatter_svg(points: ArrayView2<'_, f64>, colors: Option<&[&str]>, title: &str) -> Result<String> {
    if points.ncols() != 2 {
        return Err(Error::Config(format!(
            "scatter plots need two columns, got {}",
            points.ncols()
        )));
    }
    if let Some(c) = colors {
        if c.len() != points.nrows() {
            return Err(Error::Shape(format!("{} colors for {} points", c.len(), points.nrows())));
        }
    }
    let full = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {full} {full}" width="{full}" height="{full}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#000"/>"##
    );
    for t in [0.0, 0.5, 1.0] {
        let x = MARGIN + t * SIZE;
        let y = MARGIN + (1.0 - t) * SIZE;
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{t}</text>"#, MARGIN + SIZE + 14.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" font-size="10" text-anchor="end">{t}</text>"#, MARGIN - 4.0);
    }
    s.push_str("<g class=\"points\">\n");
    for (i, row) in points.rows().into_iter().enumerate() {
        let x = MARGIN + row[0].clamp(0.0, 1.0) * SIZE;
        let y = MARGIN + (1.0 - row[1].clamp(0.0, 1.0)) * SIZE;
        let fill = colors.map_or("#333333", |c| c[i]);
        let _ = writeln!(s, r#"<circle class="pt" cx="{x:.2}" cy="{y:.2}" r="1.2" fill="{fill}"/>"#);
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Box plot with one box per model in table column order: quartile box,
/// median line, whiskers at 1.5 IQR and outliers as points.
pub fn boxplot_svg(table: &ScoreTable, title: &str) -> Result<String> {
    let k = table.models().len();
    if k == 0 || table.replications() == 0 {
        return Err(Error::Input("cannot plot an empty score table".into()));
    }
    let cols: Vec<Vec<f64>> = (0..k).map(|j| table.column(j)).collect();
    let lo = cols.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = cols.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    let (ylo, yhi) = (lo - pad, hi + pad);
    let slot = 60.0;
    let width = 2.0 * MARGIN + slot * k as f64;
    let height = SIZE + 2.0 * MARGIN + 40.0;
    let ypos = |v: f64| MARGIN + (yhi - v) / (yhi - ylo) * SIZE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{:.2}" stroke="#000"/>"##,
        MARGIN + SIZE
    );
    for t in 0..=4 {
        let v = ylo + (yhi - ylo) * t as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" font-size="9" text-anchor="end">{v:.4}</text>"#,
            MARGIN - 4.0,
            ypos(v)
        );
    }
    for (j, (label, v)) in table.models().iter().zip(&cols).enumerate() {
        let cx = MARGIN + slot * (j as f64 + 0.5);
        let (q1, med, q3) = (quantile(v, 0.25), median(v), quantile(v, 0.75));
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = v.iter().copied().filter(|&x| x >= fence_lo && x <= fence_hi);
        let wlo = inside.clone().fold(f64::INFINITY, f64::min);
        let whi = inside.fold(f64::NEG_INFINITY, f64::max);
        let label = escape(label);
        let _ = writeln!(s, r#"<g class="model" data-model="{label}">"#);
        let _ = writeln!(
            s,
            r##"<line class="whisker" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="#000"/>"##,
            ypos(whi),
            ypos(wlo)
        );
        let _ = writeln!(
            s,
            r##"<rect class="box" x="{:.2}" y="{:.2}" width="30" height="{:.2}" fill="#9ecae1" stroke="#000"/>"##,
            cx - 15.0,
            ypos(q3),
            ypos(q1) - ypos(q3)
        );
        let _ = writeln!(
            s,
            r##"<line class="median" data-value="{med}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c00" stroke-width="2"/>"##,
            cx - 15.0,
            ypos(med),
            cx + 15.0,
            ypos(med)
        );
        for &x in v.iter().filter(|&&x| x < fence_lo || x > fence_hi) {
            let _ = writeln!(s, r##"<circle class="outlier" cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="#000"/>"##, ypos(x));
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" font-size="10" text-anchor="end" transform="rotate(-40 {cx:.2} {:.2})">{label}</text>"#,
            MARGIN + SIZE + 14.0,
            MARGIN + SIZE + 14.0
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rule_endpoints() {
        let r = ColorRule::MeanOfCoordinates;
        assert_eq!(r.color(&[0.99, 0.99, 0.99]), PALETTE[PALETTE.len() - 1]);
        assert_eq!(r.color(&[0.01, 0.01]), PALETTE[0]);
        let c: ColorRule = "corner".parse().unwrap();
        assert_eq!(c.color(&[0.1, 0.05]), PALETTE[0]);
        assert_eq!(c.color(&[0.9, 0.95]), PALETTE[PALETTE.len() - 1]);
        assert_eq!(c.color(&[0.1, 0.95]), PALETTE[4]);
        assert!("corner:0.7".parse::<ColorRule>().is_err());
    }

    #[test]
    fn scatter_marker_count() {
        let x = array![[0.1, 0.2], [0.5, 0.5], [0.9, 0.3]];
        let svg = scatter_svg(x.view(), None, "t").unwrap();
        assert_eq!(svg.matches("class=\"pt\"").count(), 3);
        assert!(scatter_svg(array![[0.1, 0.2, 0.3]].view(), None, "t").is_err());
    }

    #[test]
    fn degenerate_boxes() {
        let t = ScoreTable::new(vec!["a".into(), "b".into()], vec![vec![0.2, 0.1], vec![0.2, 0.3]]).unwrap();
        let svg = boxplot_svg(&t, "scores").unwrap();
        assert_eq!(svg.matches("class=\"box\"").count(), 2);
    }
}
