use std::path::Path;

use crate::error::{Error, Result};
use crate::protocol::{ced_curve, uniform_thresholds, Subset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CedOptions {
    pub subset: Option<Subset>,
    pub max: f64,
    pub step: f64,
}

impl Default for CedOptions {
    fn default() -> Self {
        Self {
            subset: None,
            max: 10.0,
            step: 0.1,
        }
    }
}

/// Reads error values from an `evaluate` `per_image.csv` (successful rows,
/// optionally one subset) or from plain text with one number per line,
/// where `#` starts a comment.
pub fn read_values(text: &str, source: &str, subset: Option<Subset>) -> Result<Vec<f64>> {
    let first = text.lines().next().unwrap_or("");
    if first.starts_with("image_id,") {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::parse(format!("{source}:1"), format!("missing column `{name}`"))
            })
        };
        let (c_rmse, c_status, c_subset) = (col("rmse_mm")?, col("status")?, col("subset")?);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if &rec[c_status] != "ok" {
                continue;
            }
            if let Some(want) = subset {
                if rec[c_subset].parse::<Subset>()? != want {
                    continue;
                }
            }
            values.push(
                rec[c_rmse]
                    .parse()
                    .map_err(|_| Error::parse(format!("{source}:{line}"), "bad rmse value"))?,
            );
        }
        return Ok(values);
    }
    if subset.is_some() {
        return Err(Error::InvalidArgument("--subset needs a per_image.csv input".into()));
    }
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse()
                .map_err(|_| Error::parse(format!("{source}:{}", n + 1), format!("`{line}` is not a number")))?,
        );
    }
    Ok(values)
}

/// CED curve of the values in `input` as `threshold_mm,fraction` CSV.
pub fn cmd_ced(input: &Path, opts: &CedOptions) -> Result<String> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let values = read_values(&text, &input.display().to_string(), opts.subset)?;
    let thresholds = uniform_thresholds(opts.max, opts.step)?;
    Ok(ced_curve(&values, &thresholds)?.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_image_filtering() {
        let text = "image_id,subject_id,subset,status,rmse_mm,n_vertices,radius_mm,error\n\
                    a,s,HQ,ok,1.5,10,80,\n\
                    b,s,LQ,ok,2.5,10,80,\n\
                    c,s,LQ,failed,,,,boom\n";
        assert_eq!(read_values(text, "t", None).unwrap(), vec![1.5, 2.5]);
        assert_eq!(read_values(text, "t", Some(Subset::Lq)).unwrap(), vec![2.5]);
    }

    #[test]
    fn plain_numbers_and_distance_files() {
        let text = "# image_id, n_vertices, rmse, radius_mm\n# a, 2, 1.0, 80.0\n1.0\n2.0\n";
        assert_eq!(read_values(text, "t", None).unwrap(), vec![1.0, 2.0]);
        assert!(read_values("1\nx\n", "t", None).unwrap_err().to_string().contains("t:2"));
    }
}
