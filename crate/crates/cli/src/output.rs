use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Destination for a command's files; `None` writes nothing.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf) })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let Some(path) = self.path(name) else { return Ok(()) };
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let Some(path) = self.path(name) else { return Ok(()) };
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let Some(path) = self.path(name) else { return Ok(()) };
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }
}

/// A bare line plot: one or more series over a shared x range, optional
/// logarithmic x axis, and a dashed reference line.
pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub log_x: bool,
    pub series: Vec<(&'a str, Vec<(f64, f64)>)>,
    pub reference_y: Option<f64>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

impl Plot<'_> {
    pub fn to_svg(&self) -> String {
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts = self.series.iter().flat_map(|s| s.1.iter()).filter(|p| p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
            x0 = x0.min(fx(x));
            x1 = x1.max(fx(x));
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if let Some(r) = self.reference_y {
            y0 = y0.min(r);
            y1 = y1.max(r);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| M + (fx(x) - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n\
             <line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n",
            W / 2.0,
            self.title,
            H - M,
            W - M,
            H - M,
            H - M
        );
        let xl = if self.log_x { format!("log10 {}", self.x_label) } else { self.x_label.to_string() };
        s += &format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xl}</text>\n\
             <text x=\"{M}\" y=\"{}\" text-anchor=\"middle\">{x0:.3}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x1:.3}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{y0:.4}</text>\n\
             <text x=\"{}\" y=\"{M}\" text-anchor=\"end\">{y1:.4}</text>\n",
            W / 2.0,
            H - 10.0,
            H - M + 15.0,
            W - M,
            H - M + 15.0,
            M - 4.0,
            H - M,
            M - 4.0,
        );
        if let Some(r) = self.reference_y {
            s += &format!(
                "<line x1=\"{M}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
                W - M,
                y = sy(r)
            );
        }
        for (i, (name, data)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let points: Vec<String> = data
                .iter()
                .filter(|p| p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            s += &format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
                 <text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>\n",
                points.join(" "),
                W - M - 100.0,
                M + 15.0 * (i as f64 + 1.0)
            );
        }
        s + "</svg>\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let p = Plot {
            title: "h",
            x_label: "tau",
            log_x: true,
            series: vec![("h", vec![(0.1, 1.0), (1.0, 0.9), (10.0, 1.0)])],
            reference_y: Some(1.0),
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
