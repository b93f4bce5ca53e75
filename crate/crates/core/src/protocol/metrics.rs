use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root mean square of the distances.
pub fn rmse(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyInput("distance list"));
    }
    let sum_sq: f64 = distances.iter().map(|d| d * d).sum();
    Ok((sum_sq / distances.len() as f64).sqrt())
}

/// Cumulative error distribution: the fraction of values `≤` each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CedCurve {
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
}

pub fn ced_curve(distances: &[f64], thresholds: &[f64]) -> Result<CedCurve> {
    if distances.is_empty() {
        return Err(Error::EmptyInput("distance list"));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("CED thresholds must be strictly increasing".into()));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let fractions = thresholds
        .iter()
        .map(|&t| sorted.partition_point(|&d| d <= t) as f64 / n)
        .collect();
    Ok(CedCurve {
        thresholds: thresholds.to_vec(),
        fractions,
    })
}

/// `0, step, 2·step, …` up to and including `max` (within half a step).
pub fn uniform_thresholds(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "CED range needs max ≥ 0 and step > 0 (got max {max}, step {step})"
        )));
    }
    let count = (max / step + 0.5).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

impl CedCurve {
    /// Two-column CSV `threshold_mm,fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold_mm,fraction\n");
        for (t, f) in self.thresholds.iter().zip(&self.fractions) {
            out.push_str(&format!("{t:.4},{f:.6}\n"));
        }
        out
    }
}

/// Image-quality split of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subset {
    #[serde(rename = "HQ")]
    Hq,
    #[serde(rename = "LQ")]
    Lq,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::Hq => "HQ",
            Subset::Lq => "LQ",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "HQ" | "hq" => Ok(Subset::Hq),
            "LQ" | "lq" => Ok(Subset::Lq),
            other => Err(Error::InvalidArgument(format!("unknown subset tag `{other}` (expected HQ or LQ)"))),
        }
    }
}

/// A row label of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SummaryGroup {
    #[serde(rename = "HQ")]
    Hq,
    #[serde(rename = "LQ")]
    Lq,
    Full,
}

impl SummaryGroup {
    pub const ALL: [SummaryGroup; 3] = [SummaryGroup::Hq, SummaryGroup::Lq, SummaryGroup::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            SummaryGroup::Hq => "HQ",
            SummaryGroup::Lq => "LQ",
            SummaryGroup::Full => "Full",
        }
    }

    pub fn includes(self, subset: Subset) -> bool {
        match self {
            SummaryGroup::Hq => subset == Subset::Hq,
            SummaryGroup::Lq => subset == Subset::Lq,
            SummaryGroup::Full => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: SummaryGroup,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation (divides by n).
    pub std: f64,
}

impl SummaryRow {
    /// `m.mm±s.ss`
    pub fn formatted(&self) -> String {
        format_mean_std(self.mean, self.std)
    }
}

pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.2}±{std:.2}")
}

/// Mean and population standard deviation of per-image RMSE for HQ, LQ
/// and their union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Images that failed evaluation and are excluded from every row.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageScore {
    pub image_id: String,
    pub subset: Subset,
    pub rmse: f64,
}

pub fn summarize(scores: &[ImageScore]) -> Summary {
    let rows = SummaryGroup::ALL
        .into_iter()
        .filter_map(|group| {
            let values: Vec<f64> = scores
                .iter()
                .filter(|s| group.includes(s.subset))
                .map(|s| s.rmse)
                .collect();
            if values.is_empty() {
                warn!("subset {} has no images; omitting its summary row", group.as_str());
                return None;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            Some(SummaryRow {
                group,
                count: values.len(),
                mean,
                std: var.sqrt(),
            })
        })
        .collect();
    Summary { rows, failed: 0 }
}

impl Summary {
    pub fn row(&self, group: SummaryGroup) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,count,mean_mm,std_mm,formatted\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{}\n",
                r.group.as_str(),
                r.count,
                r.mean,
                r.std,
                r.formatted()
            ));
        }
        out
    }

    /// Fixed-width table with a failure-count footer.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<6} {:>6} {:>12}\n", "Subset", "Images", "3D-RMSE (mm)");
        for r in &self.rows {
            out.push_str(&format!("{:<6} {:>6} {:>12}\n", r.group.as_str(), r.count, r.formatted()));
        }
        out.push_str(&format!("failed: {}\n", self.failed));
        out
    }
}
