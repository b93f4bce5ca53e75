//! Deterministic synthetic data: an ellipsoidal head model, sampled
//! subjects, weak-perspective landmark observations and file fixtures.
//!
//! ## Random streams
//!
//! Every draw comes from ChaCha8 keyed by the 64-bit config seed (little
//! endian in the first 8 key bytes, the remaining 24 bytes zero) with the
//! 64-bit stream number `(domain << 56) | id`. Domains are 1 for the
//! model, 2 for subjects (id = subject id) and 3 for observations (id =
//! image id). Uniform reals use `rand`'s `[low, high)` sampler and normals
//! use the ziggurat `StandardNormal` of `rand_distr`; both are
//! platform-independent, so a config reproduces the same bytes anywhere.

mod export;
mod head;
mod inflation;
mod sample;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::{image_name, write_fixture, FixtureSummary};
pub use head::{ibug68_template, make_model, uv_ellipsoid, HEAD_SEMI_AXES};
pub use inflation::{inflated_sphere_fixture, InflationFixture};
pub use sample::{
    make_observation, make_observation_with_sd, make_subject, random_camera, subject_from_coeffs, Observation,
    Subject,
};

/// Identifies an independent random stream under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Model,
    Subject(u64),
    Observation(u64),
    /// Free for tests and tools; never used by the generators.
    Custom(u64),
}

impl Stream {
    fn number(self) -> u64 {
        let (domain, id) = match self {
            Stream::Model => (1, 0),
            Stream::Subject(id) => (2, id),
            Stream::Observation(id) => (3, id),
            Stream::Custom(id) => (4, id),
        };
        (domain << 56) | (id & ((1 << 56) - 1))
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream.number());
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Vertex count `q`; `q − 2` must split into latitude rings × segments.
    pub q: usize,
    /// Shape modes.
    pub m: usize,
    /// Expression blendshapes.
    pub e: usize,
    /// Variance of the first shape mode (mm²).
    pub first_eigenvalue: f64,
    /// Ratio between consecutive eigenvalues, in `(0, 1)`.
    pub eigenvalue_decay: f64,
    /// Landmark noise standard deviation in normalized units, i.e. as a
    /// fraction of the RMS radius of the projected landmarks.
    pub landmark_noise_sd: f64,
    /// Subjects in total; the last `n_test_subjects` are held out.
    pub n_subjects: usize,
    pub n_test_subjects: usize,
    pub n_images_per_subject: usize,
    /// Noise multiplier for the low-quality half of each subject's images.
    pub lq_noise_factor: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            q: 200,
            m: 10,
            e: 2,
            first_eigenvalue: 600.0,
            eigenvalue_decay: 0.7,
            landmark_noise_sd: 0.01,
            n_subjects: 50,
            n_test_subjects: 10,
            n_images_per_subject: 3,
            lq_noise_factor: 2.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_subjects == 0 {
            return bad("n_subjects must be at least 1".into());
        }
        if self.n_images_per_subject == 0 {
            return bad("n_images_per_subject must be at least 1".into());
        }
        if self.n_test_subjects > self.n_subjects {
            return bad(format!(
                "n_test_subjects ({}) exceeds n_subjects ({})",
                self.n_test_subjects, self.n_subjects
            ));
        }
        head::sphere_grid(self.q).map_err(Error::Config)?;
        if self.m + self.e >= 3 * self.q {
            return bad(format!("m + e = {} must be below 3q = {}", self.m + self.e, 3 * self.q));
        }
        if !(self.first_eigenvalue > 0.0) || !self.first_eigenvalue.is_finite() {
            return bad(format!("first_eigenvalue must be positive, got {}", self.first_eigenvalue));
        }
        if !(self.eigenvalue_decay > 0.0 && self.eigenvalue_decay < 1.0) {
            return bad(format!("eigenvalue_decay must lie in (0, 1), got {}", self.eigenvalue_decay));
        }
        let last = self.first_eigenvalue * self.eigenvalue_decay.powi(self.m.saturating_sub(1) as i32);
        if self.m > 0 && !last.is_normal() {
            return bad(format!("eigenvalue {} underflows; raise eigenvalue_decay or lower m", self.m));
        }
        if !(self.landmark_noise_sd >= 0.0) || !self.landmark_noise_sd.is_finite() {
            return bad(format!("landmark_noise_sd must be ≥ 0, got {}", self.landmark_noise_sd));
        }
        if !(self.lq_noise_factor >= 0.0) || !self.lq_noise_factor.is_finite() {
            return bad(format!("lq_noise_factor must be ≥ 0, got {}", self.lq_noise_factor));
        }
        Ok(())
    }

    /// `λⱼ = first_eigenvalue · decay^j` for `j = 0…m−1`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| self.first_eigenvalue * self.eigenvalue_decay.powi(j as i32))
            .collect()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_repeatable() {
        let a: u64 = stream_rng(1, Stream::Subject(3)).random();
        let b: u64 = stream_rng(1, Stream::Subject(3)).random();
        let c: u64 = stream_rng(1, Stream::Subject(4)).random();
        let d: u64 = stream_rng(2, Stream::Subject(3)).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn config_validation() {
        SynthConfig::default().validate().unwrap();
        let zero = SynthConfig {
            n_subjects: 0,
            ..Default::default()
        };
        assert!(matches!(zero.validate(), Err(Error::Config(_))));
        let decay = SynthConfig {
            eigenvalue_decay: 1.0,
            ..Default::default()
        };
        assert!(decay.validate().is_err());
        let prime = SynthConfig {
            q: 199,
            ..Default::default()
        };
        assert!(prime.validate().is_err());
    }

    #[test]
    fn geometric_eigenvalues() {
        let cfg = SynthConfig {
            m: 5,
            first_eigenvalue: 100.0,
            eigenvalue_decay: 0.5,
            ..Default::default()
        };
        assert_eq!(cfg.eigenvalues(), vec![100.0, 50.0, 25.0, 12.5, 6.25]);
    }

    #[test]
    fn config_json_defaults_and_unknown_fields() {
        let cfg: SynthConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.q, 200);
        assert!(serde_json::from_str::<SynthConfig>(r#"{"sead": 7}"#).is_err());
    }
}
