//! Scores one reconstruction against its ground truth: similarity
//! alignment on the seven landmarks, face-region selection, then
//! per-vertex surface distances.

use facebench::protocol::{evaluate_pair, face_centre, region_radius, BridgeMode};
use facebench::synth::{make_model, make_subject, SynthConfig};

fn main() -> facebench::Result<()> {
    let cfg = SynthConfig::default();
    let model = make_model(&cfg)?;
    let gt = make_subject(&model, &cfg, 0)?;
    let pred = make_subject(&model, &cfg, 1)?;

    let centre = face_centre(&gt.landmarks, BridgeMode::EyeCentres);
    let radius = region_radius(&gt.landmarks, BridgeMode::EyeCentres)?;
    println!("face centre {:.2?}, radius {radius:.2} mm", centre.coords.as_slice());

    let report = evaluate_pair(&pred.mesh, &pred.landmarks, &gt.mesh, &gt.landmarks)?;
    println!(
        "{} region vertices, 3D-RMSE {:.3} mm, alignment scale {:.4}",
        report.region.vertex_ids.len(),
        report.rmse,
        report.transform.scale
    );
    let sorted = report.sorted_distances();
    println!("median vertex distance {:.3} mm", sorted[sorted.len() / 2]);

    let same = evaluate_pair(&gt.mesh, &gt.landmarks, &gt.mesh, &gt.landmarks)?;
    println!("self-evaluation 3D-RMSE {}", same.rmse);
    Ok(())
}
