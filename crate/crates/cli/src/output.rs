//! results.json, CSV tables and SVG line charts. Every file is written to a
//! temporary file in the output directory and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Formats;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default)]
pub struct Results {
    pub labels: Vec<(String, String)>,
    pub scalars: Vec<(String, f64)>,
    pub arrays: Vec<(String, Vec<f64>)>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

impl Results {
    pub fn label(&mut self, key: &str, value: impl Into<String>) {
        self.labels.push((key.into(), value.into()));
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.scalars.push((key.into(), value));
    }

    pub fn array(&mut self, key: &str, values: Vec<f64>) {
        self.arrays.push((key.into(), values));
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut map = Map::new();
        let mut insert = |k: &str, v: Value| -> Result<()> {
            match map.insert(k.to_string(), v) {
                None => Ok(()),
                Some(_) => Err(CliError::Io(format!("duplicate result key '{k}'"))),
            }
        };
        for (k, v) in &self.labels {
            insert(k, Value::String(v.clone()))?;
        }
        for (k, v) in &self.scalars {
            insert(k, number(*v))?;
        }
        for (k, vs) in &self.arrays {
            insert(k, Value::Array(vs.iter().map(|v| number(*v)).collect()))?;
        }
        Ok(Value::Object(map))
    }

    /// Write results.json and the requested tables and plots; returns the paths written.
    pub fn emit(&self, dir: &Path, formats: Formats) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut json = serde_json::to_string_pretty(&self.to_json()?).map_err(|e| CliError::Io(e.to_string()))?;
        json.push('\n');
        written.push(write_atomic(dir, "results.json", json.as_bytes())?);
        if formats.csv {
            for t in &self.tables {
                written.push(write_atomic(dir, &format!("{}.csv", t.name), &t.to_csv()?)?);
            }
        }
        if formats.svg {
            for p in &self.plots {
                written.push(write_atomic(dir, &format!("{}.svg", p.name), p.to_svg().as_bytes())?);
            }
        }
        Ok(written)
    }
}

// NaN and infinities have no JSON representation
fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl Plot {
    pub fn new(name: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn line(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push((label.into(), points));
        self
    }

    /// A static line chart with a frame, min/max tick labels and a legend.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 420.0);
        let (left, right, top, bottom) = (80.0, 20.0, 40.0, 60.0);
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts = self
            .series
            .iter()
            .flat_map(|(_, s)| s.iter())
            .filter(|(x, y)| fx(*x).is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(fx(x));
            x1 = x1.max(fx(x));
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 < x1) {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if !(y0 < y1) {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| left + (fx(x) - x0) / (x1 - x0) * (w - left - right);
        let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - left - right,
            h - top - bottom
        );
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            (left + w - right) / 2.0,
            h - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
            (top + h - bottom) / 2.0,
            (top + h - bottom) / 2.0,
            escape(&self.y_label)
        );
        let tick = |v: f64, log: bool| if log { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.4e}") };
        let _ = writeln!(s, r#"<text x="{left}" y="{}" font-size="11">{}</text>"#, h - bottom + 16.0, tick(x0, self.log_x));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#,
            w - right,
            h - bottom + 16.0,
            tick(x1, self.log_x)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#, left - 4.0, h - bottom, tick(y0, false));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#, left - 4.0, top + 10.0, tick(y1, false));
        for (i, (label, series)) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let path: Vec<String> = series
                .iter()
                .filter(|(x, y)| fx(*x).is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            let ly = top + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}" text-anchor="end" font-size="11" fill="{colour}">{}</text>"#,
                w - right - 6.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keeps_every_bit() {
        let mut r = Results::default();
        r.scalar("third", 1.0 / 3.0);
        r.scalar("tiny", 4.9e-324);
        r.array("xs", vec![0.1, 2.0f64.sqrt(), -1e300]);
        let text = serde_json::to_string(&r.to_json().unwrap()).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["third"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(back["tiny"].as_f64().unwrap(), 4.9e-324);
        assert_eq!(back["xs"][1].as_f64().unwrap(), 2.0f64.sqrt());
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let mut r = Results::default();
        r.scalar("a", 1.0);
        r.array("a", vec![]);
        assert!(r.to_json().is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("t", &["x", "y"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![2.0, 0.25]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "x,y\n1,0.5\n2,0.25\n");
    }

    #[test]
    fn svg_draws_one_polyline_per_series() {
        let p = Plot::new("p", "a < b", "x", "y")
            .line("one", vec![(1.0, 1.0), (2.0, 4.0)])
            .line("two", vec![(1.0, 2.0), (2.0, 3.0)])
            .log_x();
        let svg = p.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
    }
}
