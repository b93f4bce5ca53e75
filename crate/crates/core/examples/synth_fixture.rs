//! Writes a complete synthetic benchmark directory (model, scans, 2D
//! observations and manifests) ready for the `facebench` commands.
//!
//! Usage: `cargo run --example synth_fixture -- [DIR]`

use std::path::PathBuf;

use facebench::synth::{write_fixture, SynthConfig};

fn main() -> facebench::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("facebench-synth"));
    let cfg = SynthConfig {
        n_subjects: 12,
        n_test_subjects: 4,
        ..Default::default()
    };
    let summary = write_fixture(&cfg, &dir)?;
    println!(
        "{}: {} train / {} test subjects, {} test images",
        dir.display(),
        summary.train_subjects,
        summary.test_subjects,
        summary.test_images
    );
    println!("next: facebench train {0}/train_manifest.csv --model {0}/model.fbmm -o {0}/reg.fbcr", dir.display());
    Ok(())
}
