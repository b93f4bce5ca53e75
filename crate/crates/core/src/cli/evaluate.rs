use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::manifest::{Manifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::geometry::{load_mesh_auto, LandmarkSet7};
use crate::protocol::{
    ced_curve, evaluate_pair_with, summarize, uniform_thresholds, BridgeMode, DistanceFile, ErrorReport,
    EvalConfig, ImageScore, Summary, SummaryGroup,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluateOptions {
    pub bridge: BridgeMode,
    /// Stamp each JSON record with the evaluation time.
    pub timestamp: bool,
    pub ced_max: f64,
    pub ced_step: f64,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            bridge: BridgeMode::EyeCentres,
            timestamp: true,
            ced_max: 10.0,
            ced_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateOutcome {
    pub summary: Summary,
    /// Per manifest entry, in manifest order: the RMSE or the failure reason.
    pub results: Vec<(String, std::result::Result<f64, String>)>,
}

#[derive(Serialize)]
struct Record<'a> {
    image_id: &'a str,
    subject_id: &'a str,
    subset: &'a str,
    rmse_mm: f64,
    radius_mm: f64,
    centre: [f64; 3],
    n_vertices: usize,
    transform: TransformRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix: Option<u64>,
}

#[derive(Serialize)]
struct TransformRecord {
    scale: f64,
    /// Row-major.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

fn evaluate_entry(manifest: &Manifest, e: &ManifestEntry, config: &EvalConfig) -> Result<ErrorReport> {
    let pred_mesh = load_mesh_auto(manifest.resolve(&e.pred_mesh))?;
    let pred_lm = LandmarkSet7::load(manifest.resolve(&e.pred_landmarks))?;
    let gt_mesh = load_mesh_auto(manifest.resolve(&e.gt_mesh))?;
    let gt_lm = LandmarkSet7::load(manifest.resolve(&e.gt_landmarks))?;
    evaluate_pair_with(&pred_mesh, &pred_lm, &gt_mesh, &gt_lm, config)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn record_json(e: &ManifestEntry, r: &ErrorReport, timestamp: Option<u64>) -> Result<String> {
    let t = &r.transform;
    let rec = Record {
        image_id: &e.image_id,
        subject_id: &e.subject_id,
        subset: e.subset.as_str(),
        rmse_mm: r.rmse,
        radius_mm: r.region.radius,
        centre: r.region.centre.coords.into(),
        n_vertices: r.distances.len(),
        transform: TransformRecord {
            scale: t.scale,
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| t.rotation[(i, j)])),
            translation: t.translation.into(),
        },
        timestamp_unix: timestamp,
    };
    let mut s = serde_json::to_string_pretty(&rec)?;
    s.push('\n');
    Ok(s)
}

/// Evaluates every manifest entry and writes, under `out`:
/// `distances/<id>.txt`, `records/<id>.json`, `per_image.csv`,
/// `summary.csv`, `summary.txt` and `ced_{hq,lq,full}.csv`.
///
/// Entries that fail are logged and excluded from the aggregates.
pub fn cmd_evaluate(manifest_path: &Path, out: &Path, opts: &EvaluateOptions) -> Result<EvaluateOutcome> {
    let manifest = Manifest::load(manifest_path)?;
    manifest.validate_paths()?;
    let thresholds = uniform_thresholds(opts.ced_max, opts.ced_step)?;
    let config = EvalConfig { bridge: opts.bridge };
    info!("evaluating {} images", manifest.entries.len());

    let reports: Vec<Result<ErrorReport>> = manifest
        .entries
        .par_iter()
        .map(|e| evaluate_entry(&manifest, e, &config))
        .collect();

    let dist_dir = out.join("distances");
    let rec_dir = out.join("records");
    for d in [&dist_dir, &rec_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let timestamp = opts.timestamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });

    let mut per_image = String::from("image_id,subject_id,subset,status,rmse_mm,n_vertices,radius_mm,error\n");
    let mut scores = Vec::new();
    let mut results = Vec::new();
    for (e, r) in manifest.entries.iter().zip(reports) {
        match r {
            Ok(report) => {
                DistanceFile::from_report(&e.image_id, &report).save(dist_dir.join(format!("{}.txt", e.image_id)))?;
                write(
                    &rec_dir.join(format!("{}.json", e.image_id)),
                    record_json(e, &report, timestamp)?,
                )?;
                let _ = writeln!(
                    per_image,
                    "{},{},{},ok,{:.6},{},{:.6},",
                    e.image_id,
                    e.subject_id,
                    e.subset,
                    report.rmse,
                    report.distances.len(),
                    report.region.radius
                );
                scores.push(ImageScore {
                    image_id: e.image_id.clone(),
                    subset: e.subset,
                    rmse: report.rmse,
                });
                results.push((e.image_id.clone(), Ok(report.rmse)));
            }
            Err(err) => {
                warn!("{}: evaluation failed: {err}", e.image_id);
                let reason = err.to_string().replace([',', '\n'], ";");
                let _ = writeln!(per_image, "{},{},{},failed,,,,{reason}", e.image_id, e.subject_id, e.subset);
                results.push((e.image_id.clone(), Err(err.to_string())));
            }
        }
    }
    write(&out.join("per_image.csv"), per_image)?;

    let mut summary = summarize(&scores);
    summary.failed = results.iter().filter(|(_, r)| r.is_err()).count();
    write(&out.join("summary.csv"), summary.to_csv())?;
    write(&out.join("summary.txt"), summary.to_text())?;

    for group in SummaryGroup::ALL {
        let values: Vec<f64> = scores.iter().filter(|s| group.includes(s.subset)).map(|s| s.rmse).collect();
        let path: PathBuf = out.join(format!("ced_{}.csv", group.as_str().to_ascii_lowercase()));
        if values.is_empty() {
            warn!("no {} images; skipping {}", group.as_str(), path.display());
            continue;
        }
        write(&path, ced_curve(&values, &thresholds)?.to_csv())?;
    }
    Ok(EvaluateOutcome { summary, results })
}
