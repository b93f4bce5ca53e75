use std::path::Path;

use crate::error::Result;
use crate::synth::{write_fixture, FixtureSummary, SynthConfig};

/// Writes a synthetic benchmark to `dir`. Without a config file the
/// defaults apply; `seed` overrides the config's seed.
pub fn cmd_synth(config: Option<&Path>, dir: &Path, seed: Option<u64>) -> Result<FixtureSummary> {
    let mut cfg = match config {
        Some(p) => SynthConfig::load(p)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    write_fixture(&cfg, dir)
}
