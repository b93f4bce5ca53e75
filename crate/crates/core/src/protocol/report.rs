//! Plain-text per-image distance files.
//!
//! ```text
//! # image_id, n_vertices, rmse, radius_mm
//! # s000_i00, 812, 1.734502, 79.912044
//! 0.912345
//! ...
//! ```
//!
//! The first comment names the fields, the second carries their values.
//! One distance per line follows, in ascending ground-truth vertex order.

use std::fmt::Write as _;
use std::path::Path;

use super::evaluate::ErrorReport;
use crate::error::{Error, Result};

pub const DISTANCE_HEADER: &str = "# image_id, n_vertices, rmse, radius_mm";

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceFile {
    pub image_id: String,
    pub rmse: f64,
    pub radius_mm: f64,
    pub distances: Vec<f64>,
}

impl DistanceFile {
    pub fn from_report(image_id: &str, report: &ErrorReport) -> Self {
        Self {
            image_id: image_id.to_string(),
            rmse: report.rmse,
            radius_mm: report.region.radius,
            distances: report.distances.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.distances.len() * 10 + 96);
        out.push_str(DISTANCE_HEADER);
        out.push('\n');
        let _ = writeln!(
            out,
            "# {}, {}, {:.6}, {:.6}",
            self.image_id,
            self.distances.len(),
            self.rmse,
            self.radius_mm
        );
        for d in &self.distances {
            let _ = writeln!(out, "{d:.6}");
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == DISTANCE_HEADER => {}
            _ => return Err(Error::parse(format!("{source}:1"), "missing distance-file header")),
        }
        let values = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix('#'))
            .ok_or_else(|| Error::parse(format!("{source}:2"), "missing header values"))?;
        let fields: Vec<&str> = values.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(format!("{source}:2"), "expected 4 header values"));
        }
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(format!("{source}:{line}"), format!("`{s}` is not a number")))
        };
        let count: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(format!("{source}:2"), "bad vertex count"))?;
        let mut distances = Vec::with_capacity(count);
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            distances.push(num(line, n + 1)?);
        }
        if distances.len() != count {
            return Err(Error::parse(
                source,
                format!("header announces {count} distances, found {}", distances.len()),
            ));
        }
        Ok(Self {
            image_id: fields[0].to_string(),
            rmse: num(fields[2], 2)?,
            radius_mm: num(fields[3], 2)?,
            distances,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let f = DistanceFile {
            image_id: "img7".into(),
            rmse: 1.25,
            radius_mm: 80.0,
            distances: vec![1.0, 1.5, 0.25],
        };
        let text = f.to_text();
        assert!(text.starts_with("# image_id, n_vertices, rmse, radius_mm\n# img7, 3, 1.250000, 80.000000\n"));
        assert_eq!(DistanceFile::parse(&text, "t").unwrap(), f);
    }

    #[test]
    fn count_mismatch_rejected() {
        let text = "# image_id, n_vertices, rmse, radius_mm\n# a, 2, 1.0, 80.0\n1.0\n";
        assert!(DistanceFile::parse(text, "t").is_err());
    }
}
