//! Additive noise families and counter-based random streams.
//!
//! Every draw is keyed by `(root_seed, trial, worker, step, draw)`: the first
//! four words form a ChaCha key and `draw` selects the stream, so any path can
//! be regenerated independently of what else has been sampled.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    None,
    Gaussian,
    StudentT,
    LevyStable,
}

fn default_alpha() -> f64 {
    2.0
}

fn default_scale() -> f64 {
    1.0
}

/// Per-coordinate i.i.d. symmetric noise. `alpha` is the stability index for
/// `levy_stable` and the degrees of freedom for `student_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { family: NoiseFamily::None, alpha: 2.0, scale: 0.0 }
    }

    pub fn gaussian(scale: f64) -> Self {
        Self { family: NoiseFamily::Gaussian, alpha: 2.0, scale }
    }

    pub fn levy(alpha: f64, scale: f64) -> Self {
        Self { family: NoiseFamily::LevyStable, alpha, scale }
    }

    pub fn student_t(dof: f64, scale: f64) -> Self {
        Self { family: NoiseFamily::StudentT, alpha: dof, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0) || !self.scale.is_finite() {
            return param(format!("noise scale must be finite and nonnegative, got {}", self.scale));
        }
        match self.family {
            NoiseFamily::LevyStable if !(self.alpha > 1.0 && self.alpha <= 2.0) => {
                param(format!("levy_stable alpha must lie in (1, 2], got {}", self.alpha))
            }
            NoiseFamily::StudentT if !(self.alpha > 1.0 && self.alpha.is_finite()) => {
                param(format!("student_t degrees of freedom must exceed 1, got {}", self.alpha))
            }
            _ => Ok(()),
        }
    }

    /// True when every sample is identically zero.
    pub fn is_silent(&self) -> bool {
        self.family == NoiseFamily::None || self.scale == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub root_seed: u64,
    pub trial: u64,
    pub worker: u64,
    pub step: u64,
    pub draw: u64,
}

pub fn derive_stream(root_seed: u64, trial: u64, worker: u64, step: u64, draw: u64) -> RandomStream {
    RandomStream { root_seed, trial, worker, step, draw }
}

impl RandomStream {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk, word) in key
            .chunks_exact_mut(8)
            .zip([self.root_seed, self.trial, self.worker, self.step])
        {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.draw);
        rng
    }
}

/// Chambers–Mallows–Stuck draw from the standard symmetric stable law,
/// `alpha` in (1, 2]. At `alpha = 2` this is `N(0, 2)`.
pub fn cms_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Fills `out` with one noise vector. The spec must already be validated.
pub fn fill_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R, out: &mut [f64]) {
    if spec.is_silent() {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let s = spec.scale;
    match spec.family {
        NoiseFamily::None => unreachable!(),
        NoiseFamily::Gaussian => {
            for v in out.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = s * z;
            }
        }
        NoiseFamily::StudentT => {
            let t = StudentT::new(spec.alpha).expect("validated dof");
            for v in out.iter_mut() {
                *v = s * t.sample(rng);
            }
        }
        NoiseFamily::LevyStable => {
            for v in out.iter_mut() {
                *v = s * cms_symmetric(spec.alpha, rng);
            }
        }
    }
}

pub fn sample_noise(spec: &NoiseSpec, dim: usize, stream: &RandomStream) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut out = vec![0.0; dim];
    fill_noise(spec, &mut stream.rng(), &mut out);
    Ok(out)
}

/// Empirical mean of `‖ξ‖^alpha_probe` over `n_samples` draws taken
/// sequentially from `stream`.
pub fn estimate_central_alpha_moment(
    spec: &NoiseSpec,
    dim: usize,
    alpha_probe: f64,
    n_samples: usize,
    stream: &RandomStream,
) -> Result<f64> {
    spec.validate()?;
    if n_samples == 0 {
        return param("n_samples must be at least 1");
    }
    if !(alpha_probe > 0.0) {
        return param(format!("moment order must be positive, got {alpha_probe}"));
    }
    if spec.is_silent() {
        return Ok(0.0);
    }
    let mut rng = stream.rng();
    let mut buf = vec![0.0; dim];
    let mut acc = 0.0;
    for _ in 0..n_samples {
        fill_noise(spec, &mut rng, &mut buf);
        acc += crate::linalg::norm(&buf).powf(alpha_probe);
    }
    Ok(acc / n_samples as f64)
}
