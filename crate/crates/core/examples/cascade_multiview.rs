//! Cascaded shape regression with several images per subject. Absent
//! image slots are zero-filled, so one regressor serves 1 to 3 views.

use facebench::fitting::{
    assemble_landmark_vector, cascade_train, view_windows, CascadeOptions, RegressionTarget, TrainingSample,
};
use facebench::protocol::evaluate_pair;
use facebench::synth::{make_model, make_observation, make_subject, SynthConfig};

const SLOTS: usize = 3;

fn main() -> facebench::Result<()> {
    let cfg = SynthConfig::default();
    let model = make_model(&cfg)?;

    let mut samples = Vec::new();
    for s in 0..100 {
        let subject = make_subject(&model, &cfg, s)?;
        let views = (0..SLOTS as u64)
            .map(|i| make_observation(&model, &subject.shape, &cfg, s * 1000 + i).map(|o| o.landmarks))
            .collect::<facebench::Result<Vec<_>>>()?;
        for w in view_windows(SLOTS, SLOTS) {
            let chosen: Vec<_> = w.iter().map(|&i| views[i].clone()).collect();
            samples.push(TrainingSample {
                shape: subject.shape.clone(),
                landmarks: assemble_landmark_vector(&chosen, SLOTS)?,
            });
        }
    }
    let opts = CascadeOptions {
        target: RegressionTarget::Coefficients,
        ..Default::default()
    };
    let (reg, report) = cascade_train(&model, &samples, &opts)?;
    for (k, (obj, rms)) in report.objectives.iter().zip(&report.shape_rms[1..]).enumerate() {
        println!("stage {} objective {obj:10.3} shape rms {rms:.3} mm", k + 1);
    }

    // Held-out subjects, averaged: single subjects are noisy.
    let mut totals = [0.0; SLOTS];
    let held_out = 500..530u64;
    for s in held_out.clone() {
        let gt = make_subject(&model, &cfg, s)?;
        let views = (0..SLOTS as u64)
            .map(|i| make_observation(&model, &gt.shape, &cfg, s * 1000 + i).map(|o| o.landmarks))
            .collect::<facebench::Result<Vec<_>>>()?;
        for (p, total) in totals.iter_mut().enumerate() {
            let shape = reg.predict(&model, &assemble_landmark_vector(&views[..=p], SLOTS)?)?;
            let mesh = model.to_mesh(&shape)?;
            let lm = model.alignment_landmarks(&shape)?;
            *total += evaluate_pair(&mesh, &lm, &gt.mesh, &gt.landmarks)?.rmse;
        }
    }
    for (p, total) in totals.iter().enumerate() {
        println!("{} view(s): mean 3D-RMSE {:.3} mm", p + 1, total / held_out.clone().count() as f64);
    }
    Ok(())
}
