//! The `facebench` command line: argument definitions and the commands
//! behind them. Each command is also callable as a plain function.

mod ced;
mod evaluate;
mod fit;
pub mod manifest;
mod synth;
mod train;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fitting::RegressionTarget;
use crate::protocol::{BridgeMode, Subset};

pub use ced::{cmd_ced, read_values, CedOptions};
pub use evaluate::{cmd_evaluate, EvaluateOptions, EvaluateOutcome};
pub use fit::{cmd_fit, FitMethod, FitOptions};
pub use manifest::{Manifest, ManifestEntry, TrainEntry, TrainManifest};
pub use synth::cmd_synth;
pub use train::{cmd_train, load_training_samples, TrainOptions};

/// Output directory used when neither `--out` nor `FACEBENCH_OUT` is set.
pub const DEFAULT_OUT: &str = "facebench-out";

#[derive(Debug, Parser)]
#[command(name = "facebench", version, about = "Dense 3D face reconstruction benchmark toolkit")]
pub struct Cli {
    /// Worker threads (default: logical CPU count).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Exit with status 1 when any image fails to evaluate.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Overrides the seed of a synthetic config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "FACEBENCH_OUT")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions listed in a manifest against their ground truth.
    Evaluate(EvaluateArgs),
    /// Reconstruct a mesh from 68-point 2D landmark files.
    Fit(FitArgs),
    /// Train a cascaded regressor from a training manifest.
    Train(TrainArgs),
    /// Generate a synthetic benchmark directory.
    Synth(SynthArgs),
    /// Cumulative error distribution of per-image errors.
    Ced(CedArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BridgeArg {
    EyeCentres,
    InnerCorners,
}

impl From<BridgeArg> for BridgeMode {
    fn from(b: BridgeArg) -> Self {
        match b {
            BridgeArg::EyeCentres => BridgeMode::EyeCentres,
            BridgeArg::InnerCorners => BridgeMode::InnerCorners,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub manifest: PathBuf,
    /// Leave the timestamp out of the per-image JSON records.
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, value_enum, default_value = "eye-centres")]
    pub bridge: BridgeArg,
    #[arg(long, default_value_t = 10.0)]
    pub ced_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub ced_step: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Linear,
    Cascade,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub method: MethodArg,
    /// Trained regressor, required by `--method cascade`.
    #[arg(long)]
    pub regressor: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long)]
    pub nonnegative_expressions: bool,
    /// Output mesh (`.obj` or `.ply`); protocol landmarks are written next
    /// to it as `<stem>.landmarks.txt`.
    #[arg(long, short)]
    pub output: PathBuf,
    /// 68-point landmark files (`.pts` or plain `x y` rows).
    #[arg(required = true)]
    pub landmarks: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Vertices,
    Coefficients,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training manifest (`subject_id,shape,landmarks`).
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub stages: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub ridge: f64,
    /// Image slots `N` of the regressor.
    #[arg(long, default_value_t = 1)]
    pub images: usize,
    #[arg(long, value_enum, default_value = "vertices")]
    pub mode: ModeArg,
    /// Regressor file (`.json` for JSON, binary otherwise).
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON config; defaults apply to missing fields or a missing file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (falls back to `--out`).
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CedArgs {
    /// `per_image.csv` from `evaluate`, or one number per line.
    pub input: PathBuf,
    #[arg(long)]
    pub subset: Option<Subset>,
    #[arg(long, default_value_t = 10.0)]
    pub max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn out_dir(cli_out: &Option<PathBuf>) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Evaluate(a) => {
            let opts = EvaluateOptions {
                bridge: a.bridge.into(),
                timestamp: !a.no_timestamp,
                ced_max: a.ced_max,
                ced_step: a.ced_step,
            };
            let outcome = cmd_evaluate(&a.manifest, &out_dir(&cli.out), &opts)?;
            print!("{}", outcome.summary.to_text());
            Ok(if cli.strict && outcome.summary.failed > 0 { 1 } else { 0 })
        }
        Command::Fit(a) => {
            let method = match (a.method, a.regressor) {
                (MethodArg::Linear, None) => FitMethod::Linear,
                (MethodArg::Linear, Some(_)) => {
                    return Err(Error::InvalidArgument("--regressor only applies to --method cascade".into()))
                }
                (MethodArg::Cascade, Some(r)) => FitMethod::Cascade { regressor: r },
                (MethodArg::Cascade, None) => {
                    return Err(Error::InvalidArgument("--method cascade needs --regressor".into()))
                }
            };
            let opts = FitOptions {
                method,
                lambda: a.lambda,
                iterations: a.iterations,
                nonnegative_expressions: a.nonnegative_expressions,
            };
            let written = cmd_fit(&a.model, &a.landmarks, &a.output, &opts)?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
        Command::Train(a) => {
            let opts = TrainOptions {
                stages: a.stages,
                ridge: a.ridge,
                images: a.images,
                target: match a.mode {
                    ModeArg::Vertices => RegressionTarget::Vertices,
                    ModeArg::Coefficients => RegressionTarget::Coefficients,
                },
            };
            let report = cmd_train(&a.manifest, &a.model, &a.output, &opts)?;
            for (k, obj) in report.objectives.iter().enumerate() {
                println!("stage {} objective {:.6e} shape_rms_mm {:.6}", k + 1, obj, report.shape_rms[k + 1]);
            }
            Ok(0)
        }
        Command::Synth(a) => {
            let dir = a.dir.or(cli.out).ok_or_else(|| {
                Error::InvalidArgument("synth needs an output directory (positional or --out)".into())
            })?;
            let summary = cmd_synth(a.config.as_deref(), &dir, cli.seed)?;
            println!(
                "wrote {}: {} training subjects, {} test subjects, {} test images",
                dir.display(),
                summary.train_subjects,
                summary.test_subjects,
                summary.test_images
            );
            Ok(0)
        }
        Command::Ced(a) => {
            let opts = CedOptions {
                subset: a.subset,
                max: a.max,
                step: a.step,
            };
            let csv = cmd_ced(&a.input, &opts)?;
            match a.output {
                Some(p) => std::fs::write(&p, csv).map_err(|e| Error::io(&p, e))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}
