//! Writes a complete synthetic benchmark to disk.
//!
//! ```text
//! config.json            effective configuration
//! model.fbmm             morphable model
//! mean.obj               mean shape, the trivial baseline prediction
//! mean.landmarks.txt
//! train/sNNN/scan.obj    ground-truth scan
//! train/sNNN/scan.landmarks.txt
//! train/sNNN/sNNN_iMM.pts  2D observations
//! test/sNNN/…            held-out subjects, same layout
//! pred/                  empty; destination for fitted meshes
//! train_manifest.csv     training subjects with their views
//! manifest.csv           held-out images with predictions under pred/
//! self_manifest.csv      predictions replaced by the ground truth
//! baseline_manifest.csv  predictions replaced by the mean shape
//! ```
//!
//! The first `⌈n/2⌉` images of every subject are HQ; the rest are LQ with
//! noise scaled by `lq_noise_factor`.

use std::path::Path;

use super::{make_model, make_observation_with_sd, make_subject, SynthConfig};
use crate::cli::manifest::{Manifest, ManifestEntry, TrainEntry, TrainManifest};
use crate::error::{Error, Result};
use crate::fitting::save_landmarks_2d;
use crate::geometry::{save_mesh, MeshFormat};
use crate::protocol::Subset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSummary {
    pub train_subjects: usize,
    pub test_subjects: usize,
    pub test_images: usize,
}

/// `s{subject:03}_i{image:02}`
pub fn image_name(subject: u64, image: u64) -> String {
    format!("s{subject:03}_i{image:02}")
}

fn subject_name(subject: u64) -> String {
    format!("s{subject:03}")
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_fixture(cfg: &SynthConfig, out: &Path) -> Result<FixtureSummary> {
    cfg.validate()?;
    if cfg.n_images_per_subject > 1000 {
        return Err(Error::Config("n_images_per_subject must be at most 1000".into()));
    }
    mkdir(out)?;
    let config_path = out.join("config.json");
    let mut json = serde_json::to_string_pretty(cfg)?;
    json.push('\n');
    std::fs::write(&config_path, json).map_err(|e| Error::io(&config_path, e))?;

    let model = make_model(cfg)?;
    model.save(out.join("model.fbmm"))?;
    let mean_mesh = model.to_mesh(model.mean())?;
    save_mesh(&mean_mesh, out.join("mean.obj"), MeshFormat::Obj)?;
    model.alignment_landmarks(model.mean())?.save(out.join("mean.landmarks.txt"))?;
    mkdir(&out.join("pred"))?;

    let n_train = cfg.n_subjects - cfg.n_test_subjects;
    let hq_count = cfg.n_images_per_subject.div_ceil(2);
    let mut train = TrainManifest {
        base_dir: out.to_path_buf(),
        entries: Vec::new(),
    };
    let mut predicted = Vec::new();
    let mut selfs = Vec::new();
    let mut baseline = Vec::new();

    for subject in 0..cfg.n_subjects as u64 {
        let split = if (subject as usize) < n_train { "train" } else { "test" };
        let sname = subject_name(subject);
        let rel_dir = format!("{split}/{sname}");
        mkdir(&out.join(&rel_dir))?;
        let s = make_subject(&model, cfg, subject)?;
        let scan = format!("{rel_dir}/scan.obj");
        let scan_lm = format!("{rel_dir}/scan.landmarks.txt");
        save_mesh(&s.mesh, out.join(&scan), MeshFormat::Obj)?;
        s.landmarks.save(out.join(&scan_lm))?;

        let mut views = Vec::with_capacity(cfg.n_images_per_subject);
        for image in 0..cfg.n_images_per_subject as u64 {
            let subset = if (image as usize) < hq_count { Subset::Hq } else { Subset::Lq };
            let sd = match subset {
                Subset::Hq => cfg.landmark_noise_sd,
                Subset::Lq => cfg.landmark_noise_sd * cfg.lq_noise_factor,
            };
            let name = image_name(subject, image);
            let obs = make_observation_with_sd(&model, &s.shape, cfg.seed, subject * 1000 + image, sd)?;
            let pts = format!("{rel_dir}/{name}.pts");
            save_landmarks_2d(&obs.landmarks, out.join(&pts))?;
            views.push(pts);

            if split == "test" {
                let entry = |pm: String, pl: String| ManifestEntry {
                    image_id: name.clone(),
                    subject_id: sname.clone(),
                    subset,
                    pred_mesh: pm,
                    pred_landmarks: pl,
                    gt_mesh: scan.clone(),
                    gt_landmarks: scan_lm.clone(),
                };
                predicted.push(entry(format!("pred/{name}.obj"), format!("pred/{name}.landmarks.txt")));
                selfs.push(entry(scan.clone(), scan_lm.clone()));
                baseline.push(entry("mean.obj".into(), "mean.landmarks.txt".into()));
            }
        }
        if split == "train" {
            train.entries.push(TrainEntry {
                subject_id: sname,
                shape: scan,
                landmarks: views,
            });
        }
    }

    train.save(out.join("train_manifest.csv"))?;
    let test_images = predicted.len();
    for (file, entries) in [
        ("manifest.csv", predicted),
        ("self_manifest.csv", selfs),
        ("baseline_manifest.csv", baseline),
    ] {
        let path = out.join(file);
        if entries.is_empty() {
            // A manifest without entries would not load; write the header only.
            let header = crate::cli::manifest::MANIFEST_HEADER.join(",") + "\n";
            std::fs::write(&path, header).map_err(|e| Error::io(&path, e))?;
        } else {
            Manifest {
                base_dir: out.to_path_buf(),
                entries,
            }
            .save(&path)?;
        }
    }
    Ok(FixtureSummary {
        train_subjects: n_train,
        test_subjects: cfg.n_test_subjects,
        test_images,
    })
}
