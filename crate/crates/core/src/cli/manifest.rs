//! Dataset manifests.
//!
//! Evaluation manifest, one row per image:
//!
//! ```text
//! image_id,subject_id,subset,pred_mesh,pred_landmarks,gt_mesh,gt_landmarks
//! s040_i00,s040,HQ,pred/s040_i00.obj,pred/s040_i00.landmarks.txt,test/s040/scan.obj,test/s040/scan.landmarks.txt
//! ```
//!
//! Training manifest, one row per subject, views joined with `;`:
//!
//! ```text
//! subject_id,shape,landmarks
//! s000,train/s000/scan.obj,train/s000/s000_i00.pts;train/s000/s000_i01.pts
//! ```
//!
//! Paths are relative to the manifest's directory and use `/`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Subset;

pub const MANIFEST_HEADER: [&str; 7] = [
    "image_id",
    "subject_id",
    "subset",
    "pred_mesh",
    "pred_landmarks",
    "gt_mesh",
    "gt_landmarks",
];

pub const TRAIN_MANIFEST_HEADER: [&str; 3] = ["subject_id", "shape", "landmarks"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub subject_id: String,
    pub subset: Subset,
    pub pred_mesh: String,
    pub pred_landmarks: String,
    pub gt_mesh: String,
    pub gt_landmarks: String,
}

impl ManifestEntry {
    fn paths(&self) -> [(&'static str, &str); 4] {
        [
            ("pred_mesh", &self.pred_mesh),
            ("pred_landmarks", &self.pred_landmarks),
            ("gt_mesh", &self.gt_mesh),
            ("gt_landmarks", &self.gt_landmarks),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

/// Joins `rel` onto `base` unless it is absolute.
pub fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn check_header(found: &csv::StringRecord, expected: &[&str], source: &str) -> Result<()> {
    let names: Vec<&str> = found.iter().map(str::trim).collect();
    if names != expected {
        return Err(Error::Manifest {
            location: format!("{source}:1"),
            message: format!("header must be `{}`, found `{}`", expected.join(","), names.join(",")),
        });
    }
    Ok(())
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

impl Manifest {
    pub fn parse(text: &str, source: &str, base_dir: PathBuf) -> Result<Self> {
        let mut rdr = reader(text);
        let headers = rdr.headers()?.clone();
        check_header(&headers, &MANIFEST_HEADER, source)?;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let loc = format!("{source}:{line}");
            let entry: ManifestEntry = rec.deserialize(Some(&headers)).map_err(|e| Error::Manifest {
                location: loc.clone(),
                message: e.to_string(),
            })?;
            if entry.image_id.is_empty() {
                return Err(Error::Manifest {
                    location: loc,
                    message: "empty image_id".into(),
                });
            }
            if !seen.insert(entry.image_id.clone()) {
                return Err(Error::Manifest {
                    location: loc,
                    message: format!("duplicate image_id `{}`", entry.image_id),
                });
            }
            entries.push(entry);
        }
        if entries.is_empty() {
            return Err(Error::Manifest {
                location: source.to_string(),
                message: "no entries".into(),
            });
        }
        Ok(Self { base_dir, entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string(), base_of(path))
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        resolve(&self.base_dir, rel)
    }

    /// Fails on the first entry referencing a missing file.
    pub fn validate_paths(&self) -> Result<()> {
        for e in &self.entries {
            for (field, rel) in e.paths() {
                if !self.resolve(rel).is_file() {
                    return Err(Error::Manifest {
                        location: format!("entry `{}`", e.image_id),
                        message: format!("{field} `{rel}` does not exist"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainEntry {
    pub subject_id: String,
    pub shape: String,
    pub landmarks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainManifest {
    pub base_dir: PathBuf,
    pub entries: Vec<TrainEntry>,
}

impl TrainManifest {
    pub fn parse(text: &str, source: &str, base_dir: PathBuf) -> Result<Self> {
        let mut rdr = reader(text);
        check_header(rdr.headers()?, &TRAIN_MANIFEST_HEADER, source)?;
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let loc = format!("{source}:{}", rec.position().map_or(0, |p| p.line()));
            if rec.len() != 3 {
                return Err(Error::Manifest {
                    location: loc,
                    message: format!("expected 3 fields, found {}", rec.len()),
                });
            }
            let landmarks: Vec<String> = rec[2]
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if landmarks.is_empty() {
                return Err(Error::Manifest {
                    location: loc,
                    message: "no landmark files".into(),
                });
            }
            entries.push(TrainEntry {
                subject_id: rec[0].to_string(),
                shape: rec[1].to_string(),
                landmarks,
            });
        }
        Ok(Self { base_dir, entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string(), base_of(path))
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        resolve(&self.base_dir, rel)
    }

    pub fn to_csv(&self) -> String {
        let mut out = TRAIN_MANIFEST_HEADER.join(",");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.subject_id, e.shape, e.landmarks.join(";")));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "image_id,subject_id,subset,pred_mesh,pred_landmarks,gt_mesh,gt_landmarks\n\
                        a,s1,HQ,p/a.obj,p/a.txt,g/s1.obj,g/s1.txt\n\
                        b,s1,LQ,p/b.obj,p/b.txt,g/s1.obj,g/s1.txt\n";

    #[test]
    fn parse_and_round_trip() {
        let m = Manifest::parse(TEXT, "m.csv", PathBuf::from("/data")).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].subset, Subset::Lq);
        assert_eq!(m.resolve(&m.entries[0].gt_mesh), PathBuf::from("/data/g/s1.obj"));
        assert_eq!(m.to_csv().unwrap(), TEXT);
    }

    #[test]
    fn rejects_duplicates_and_bad_subset() {
        let dup = format!("{TEXT}a,s2,HQ,x,x,x,x\n");
        let e = Manifest::parse(&dup, "m.csv", PathBuf::new()).unwrap_err().to_string();
        assert!(e.contains("m.csv:4") && e.contains("duplicate"), "{e}");
        let bad = TEXT.replace(",LQ,", ",XQ,");
        assert!(Manifest::parse(&bad, "m.csv", PathBuf::new()).is_err());
        let header = TEXT.replace("subset", "quality");
        assert!(Manifest::parse(&header, "m.csv", PathBuf::new()).is_err());
    }

    #[test]
    fn missing_file_names_entry() {
        let m = Manifest::parse(TEXT, "m.csv", PathBuf::from("/nonexistent")).unwrap();
        let e = m.validate_paths().unwrap_err().to_string();
        assert!(e.contains("entry `a`") && e.contains("pred_mesh"), "{e}");
    }

    #[test]
    fn train_manifest_round_trip() {
        let text = "subject_id,shape,landmarks\ns0,t/s0.obj,t/a.pts;t/b.pts\n";
        let m = TrainManifest::parse(text, "t.csv", PathBuf::new()).unwrap();
        assert_eq!(m.entries[0].landmarks, vec!["t/a.pts", "t/b.pts"]);
        assert_eq!(m.to_csv(), text);
    }
}
