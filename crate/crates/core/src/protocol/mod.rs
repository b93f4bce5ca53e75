//! The evaluation metric: face centre and radius, region selection,
//! alignment plus point-to-surface distances, 3D-RMSE, CED curves and
//! `mean±std` summaries.

mod evaluate;
mod metrics;
mod region;
pub mod report;

pub use evaluate::{evaluate_pair, evaluate_pair_with, ErrorReport, EvalConfig};
pub use metrics::{
    ced_curve, format_mean_std, rmse, summarize, uniform_thresholds, CedCurve, ImageScore, Subset,
    Summary, SummaryGroup, SummaryRow,
};
pub use region::{face_centre, nose_bridge, region_radius, select_region, BridgeMode, RegionSpec};
pub use report::DistanceFile;
