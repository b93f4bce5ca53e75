//! Benchmark-style aggregation: HQ/LQ/Full summary table and cumulative
//! error distribution over per-image RMSE.

use facebench::protocol::{ced_curve, summarize, uniform_thresholds, ImageScore, Subset};

fn main() -> facebench::Result<()> {
    let per_image = [
        ("img_000", Subset::Hq, 1.8),
        ("img_001", Subset::Hq, 2.4),
        ("img_002", Subset::Hq, 2.1),
        ("img_003", Subset::Lq, 2.9),
        ("img_004", Subset::Lq, 3.6),
        ("img_005", Subset::Lq, 2.2),
    ];
    let scores: Vec<ImageScore> = per_image
        .iter()
        .map(|&(id, subset, rmse)| ImageScore {
            image_id: id.into(),
            subset,
            rmse,
        })
        .collect();
    print!("{}", summarize(&scores).to_text());

    let values: Vec<f64> = scores.iter().map(|s| s.rmse).collect();
    let curve = ced_curve(&values, &uniform_thresholds(4.0, 0.5)?)?;
    print!("{}", curve.to_csv());
    Ok(())
}
