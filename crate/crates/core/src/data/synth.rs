use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, TaskKind};
use super::polynomial::{Polynomial, NUM_VARS};
use crate::{seed, Error, Result};

/// Feature values are standard normal draws clamped to this interval.
pub const DEFAULT_FEATURE_RANGE: (f64, f64) = (-3.0, 3.0);

/// Additive target noise `level · degree · r`, with `r` a standard normal
/// truncated to `[r_low, r_high]` (rejection sampled).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
    pub r_low: f64,
    pub r_high: f64,
}

impl NoiseSpec {
    pub fn new(level: f64) -> Self {
        NoiseSpec {
            level,
            r_low: -2.0,
            r_high: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level >= 0.0) || !self.level.is_finite() {
            return Err(Error::Config(format!(
                "noise level must be >= 0, got {}",
                self.level
            )));
        }
        // the rejection sampler needs real mass in the window
        if !(self.r_low < 0.0 && self.r_high > 0.0) {
            return Err(Error::Config(format!(
                "noise window [{}, {}] must contain 0 in its interior",
                self.r_low, self.r_high
            )));
        }
        Ok(())
    }

    /// Largest possible `|y - f(x)|` for a polynomial of the given degree.
    pub fn bound(&self, degree: u32) -> f64 {
        self.level * degree as f64 * self.r_low.abs().max(self.r_high)
    }

    fn sample_r<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let r: f64 = StandardNormal.sample(rng);
            if (self.r_low..=self.r_high).contains(&r) {
                return r;
            }
        }
    }
}

/// Draws `size` feature rows and labels them with `p` plus noise.
///
/// Features and noise use separate streams derived from `seed`, so the same
/// seed yields the same inputs at every noise level.
pub fn generate_dataset(
    p: &Polynomial,
    size: usize,
    noise: NoiseSpec,
    feature_range: (f64, f64),
    seed: u64,
) -> Result<Dataset> {
    if size < 1 {
        return Err(Error::Config("dataset size must be >= 1".into()));
    }
    noise.validate()?;
    let (lo, hi) = feature_range;
    if !(lo < hi) {
        return Err(Error::Config(format!("empty feature range [{lo}, {hi}]")));
    }
    let mut feature_rng = seed::rng(seed::derive(seed, "features", 0));
    let mut noise_rng = seed::rng(seed::derive(seed, "noise", 0));
    let features = Array2::from_shape_simple_fn((size, NUM_VARS), || {
        let v: f64 = StandardNormal.sample(&mut feature_rng);
        v.clamp(lo, hi)
    });
    let scale = noise.level * p.degree() as f64;
    let mut targets = Array2::zeros((size, 1));
    for (i, row) in features.rows().into_iter().enumerate() {
        let fx = p.eval(row.as_slice().expect("row-major"))?;
        let r = noise.sample_r(&mut noise_rng);
        targets[[i, 0]] = if scale == 0.0 { fx } else { fx + scale * r };
    }
    Dataset::new(
        format!("poly-d{}-n{}-s{}", p.degree(), noise.level, size),
        features,
        targets,
        TaskKind::Regression,
    )
}
