//! Report emission: JSON with sorted keys, CSV with `%.12e` floats, and
//! log–log SVG plots with a fitted line.

use crate::error::Result;
use crate::fmt::sci;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Pretty JSON with keys sorted at every level.
pub fn json_string<T: Serialize>(value: &T) -> String {
    // serde_json's `Value` map is ordered by key
    let v = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

pub struct Reporter {
    pub dir: PathBuf,
    pub seed: u64,
}

impl Reporter {
    pub fn new(dir: &Path, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Reporter {
            dir: dir.to_path_buf(),
            seed,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `name` with a top-level `seed` key added.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.insert("seed".into(), self.seed.into());
        }
        std::fs::write(self.path(name), json_string(&v))?;
        Ok(())
    }

    /// Writes CSV text preceded by a `# seed=<n>` comment line.
    pub fn csv(&self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.path(name), format!("# seed={}\n{body}", self.seed))?;
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.path(name), body)?;
        Ok(())
    }
}

/// Header-plus-rows CSV with every float in `%.12e`.
pub fn float_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r.iter().map(|x| sci(*x))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Log–log scatter of `(x, y)` with the least-squares line and its slope.
pub fn svg_loglog(title: &str, xlabel: &str, ylabel: &str, x: &[f64], y: &[f64]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.log10(), b.log10()))
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">log10 {}</text>"#,
        w / 2.0,
        h - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle" font-family="sans-serif" font-size="13">log10 {}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(ylabel)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    if pts.len() >= 2 {
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let (y0, y1) = bounds(pts.iter().map(|p| p.1));
        let sx = |v: f64| m + (v - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |v: f64| h - m - (v - y0) / (y1 - y0) * (h - 2.0 * m);
        for (a, b) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="steelblue"/>"#,
                sx(*a),
                sy(*b)
            );
        }
        let n = pts.len() as f64;
        let (mx, my) = (
            pts.iter().map(|p| p.0).sum::<f64>() / n,
            pts.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = if sxx > 0.0 {
            pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
        } else {
            0.0
        };
        let line = |v: f64| my + slope * (v - mx);
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="firebrick" stroke-width="1.5"/>"#,
            sx(x0),
            sy(line(x0)),
            sx(x1),
            sy(line(x1))
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="firebrick">fitted slope = {}</text>"#,
            m + 8.0,
            m + 18.0,
            sci(slope)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let pad = ((hi - lo) * 0.08).max(1e-3);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct R {
            zeta: f64,
            alpha: bool,
        }
        let s = json_string(&R { zeta: 1.0, alpha: true });
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(float_csv(&["a", "b"], &[]), "a,b\n");
    }

    #[test]
    fn svg_has_slope_annotation() {
        let s = svg_loglog("scan", "t", "F", &[0.1, 0.05, 0.025], &[1.0, 0.5, 0.25]);
        assert!(s.contains("fitted slope = 1.000000000000e+00"));
    }
}
