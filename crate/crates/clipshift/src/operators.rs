//! Clipping, proximal maps, and Monte-Carlo checks of the clipping bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{dist_sq, dot, norm, sub};
use crate::noise::{estimate_central_alpha_moment, fill_noise, NoiseSpec, RandomStream};

/// In-place `min{1, λ/‖x‖}·x`. The zero vector maps to itself.
pub fn clip_in_place(x: &mut [f64], lambda: f64) {
    debug_assert!(lambda > 0.0);
    let nx = norm(x);
    if nx > lambda {
        let c = lambda / nx;
        x.iter_mut().for_each(|v| *v *= c);
    }
}

pub fn clip(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return param(format!("clipping level must be positive, got {lambda}"));
    }
    let mut y = x.to_vec();
    clip_in_place(&mut y, lambda);
    Ok(y)
}

/// The composite term Ψ. `squared_l2` is `(weight/2)·‖x‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxSpec {
    Zero,
    IndicatorBall { center: Vec<f64>, radius: f64 },
    L1 { weight: f64 },
    SquaredL2 { weight: f64 },
}

impl Default for ProxSpec {
    fn default() -> Self {
        ProxSpec::Zero
    }
}

/// Relative slack used when testing ball membership.
const BALL_TOL: f64 = 1e-12;

impl ProxSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ProxSpec::Zero => Ok(()),
            ProxSpec::IndicatorBall { center, radius } => {
                if center.len() != dim {
                    return param(format!("ball center has length {}, expected {dim}", center.len()));
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return param(format!("ball radius must be positive, got {radius}"));
                }
                Ok(())
            }
            ProxSpec::L1 { weight } | ProxSpec::SquaredL2 { weight } => {
                if !(*weight >= 0.0) || !weight.is_finite() {
                    return param(format!("weight must be nonnegative, got {weight}"));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ProxSpec::Zero => true,
            ProxSpec::L1 { weight } | ProxSpec::SquaredL2 { weight } => *weight == 0.0,
            ProxSpec::IndicatorBall { .. } => false,
        }
    }

    pub fn prox_in_place(&self, x: &mut [f64], gamma: f64) {
        match self {
            ProxSpec::Zero => {}
            ProxSpec::IndicatorBall { center, radius } => {
                let d = dist_sq(x, center).sqrt();
                if d > *radius {
                    let c = radius / d;
                    for (xi, ci) in x.iter_mut().zip(center) {
                        *xi = ci + c * (*xi - ci);
                    }
                }
            }
            ProxSpec::L1 { weight } => {
                let t = gamma * weight;
                for xi in x.iter_mut() {
                    *xi = if xi.abs() <= t { 0.0 } else { *xi - t * xi.signum() };
                }
            }
            ProxSpec::SquaredL2 { weight } => {
                let c = 1.0 / (1.0 + gamma * weight);
                x.iter_mut().for_each(|v| *v *= c);
            }
        }
    }

    pub fn prox(&self, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
        if !(gamma > 0.0) {
            return param(format!("prox step must be positive, got {gamma}"));
        }
        let mut y = x.to_vec();
        self.prox_in_place(&mut y, gamma);
        Ok(y)
    }

    /// Ψ(x); `+∞` outside the ball for the indicator.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ProxSpec::Zero => 0.0,
            ProxSpec::IndicatorBall { .. } => {
                if self.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxSpec::L1 { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxSpec::SquaredL2 { weight } => 0.5 * weight * dot(x, x),
        }
    }

    /// Membership in dom Ψ (always true except for the ball).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ProxSpec::IndicatorBall { center, radius } => {
                dist_sq(x, center).sqrt() <= radius * (1.0 + BALL_TOL)
            }
            _ => true,
        }
    }
}

pub fn prox(spec: &ProxSpec, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
    spec.prox(x, gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub bias: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub n_workers: usize,
    pub n_samples: usize,
    pub bias_bound: f64,
    pub variance_bound: f64,
    pub repetitions: Vec<RepetitionResult>,
    /// Three standard errors of the bias estimate in the worst repetition.
    pub bias_mc_margin: f64,
    pub pass: bool,
}

pub const BOUND_REPETITIONS: usize = 3;

/// Monte-Carlo check of the bias and variance bounds for the average of
/// `n_workers` independently clipped copies of `mean + ξ`.
///
/// When `sigma` is `None` it is estimated from `max(n_samples, 10^5)` fresh
/// draws as the `alpha`-th root of the empirical `alpha`-moment.
#[allow(clippy::too_many_arguments)]
pub fn verify_clip_moment_bounds(
    mean: &[f64],
    noise: &NoiseSpec,
    lambda: f64,
    sigma: Option<f64>,
    alpha: f64,
    n_samples: usize,
    n_workers: usize,
    stream: &RandomStream,
) -> Result<BoundReport> {
    noise.validate()?;
    if !(lambda > 0.0) {
        return param(format!("clipping level must be positive, got {lambda}"));
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return param(format!("alpha must lie in (1, 2], got {alpha}"));
    }
    if n_samples < 2 || n_workers == 0 {
        return param("need at least 2 samples and 1 worker");
    }
    if norm(mean) > lambda / 2.0 {
        return Err(Error::Precondition(format!(
            "‖mean‖ = {} exceeds λ/2 = {}",
            norm(mean),
            lambda / 2.0
        )));
    }
    let dim = mean.len();
    let sigma = match sigma {
        Some(s) => s,
        None => {
            let est_stream = RandomStream { draw: stream.draw.wrapping_add(1 << 32), ..*stream };
            let m = estimate_central_alpha_moment(noise, dim, alpha, n_samples.max(100_000), &est_stream)?;
            m.powf(1.0 / alpha)
        }
    };
    let sa = sigma.powf(alpha);
    let bias_bound = 2f64.powf(alpha) * sa / lambda.powf(alpha - 1.0);
    let variance_bound = 18.0 * lambda.powf(2.0 - alpha) * sa / n_workers as f64;

    let mut rng = stream.rng();
    let mut buf = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut reps = Vec::with_capacity(BOUND_REPETITIONS);
    let mut margin = 0.0f64;
    for _ in 0..BOUND_REPETITIONS {
        // Welford per coordinate.
        let mut mu = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for s in 0..n_samples {
            avg.iter_mut().for_each(|v| *v = 0.0);
            for _ in 0..n_workers {
                fill_noise(noise, &mut rng, &mut buf);
                for (b, m) in buf.iter_mut().zip(mean) {
                    *b += m;
                }
                clip_in_place(&mut buf, lambda);
                for (a, b) in avg.iter_mut().zip(&buf) {
                    *a += b;
                }
            }
            let inv = 1.0 / n_workers as f64;
            let cnt = (s + 1) as f64;
            for j in 0..dim {
                let v = avg[j] * inv;
                let delta = v - mu[j];
                mu[j] += delta / cnt;
                m2[j] += delta * (v - mu[j]);
            }
        }
        let variance = m2.iter().sum::<f64>() / n_samples as f64;
        let bias = norm(&sub(&mu, mean));
        margin = margin.max(3.0 * (variance / n_samples as f64).sqrt());
        reps.push(RepetitionResult { bias, variance });
    }
    let pass = reps.iter().all(|r| r.bias <= bias_bound && r.variance <= variance_bound);
    Ok(BoundReport {
        lambda,
        alpha,
        sigma,
        n_workers,
        n_samples,
        bias_bound,
        variance_bound,
        repetitions: reps,
        bias_mc_margin: margin,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub variant: String,
    pub property: String,
    pub trials: usize,
    /// Largest violation seen (nonpositive when the property holds).
    pub worst: f64,
    pub pass: bool,
}

fn random_vec<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect()
}

/// Nonexpansiveness and the prox inequality
/// `⟨x⁺ − x, y − x⁺⟩ ≥ γ(Ψ(x⁺) − Ψ(y))` on random inputs for every variant.
pub fn check_prox_properties(dim: usize, trials: usize, stream: &RandomStream) -> Vec<PropertyCheck> {
    let mut rng = stream.rng();
    let variants = vec![
        ("zero", ProxSpec::Zero),
        ("indicator_ball", ProxSpec::IndicatorBall { center: vec![0.5; dim], radius: 1.3 }),
        ("l1", ProxSpec::L1 { weight: 0.7 }),
        ("squared_l2", ProxSpec::SquaredL2 { weight: 2.0 }),
    ];
    let mut out = Vec::new();
    for (name, spec) in variants {
        let mut worst_ne = f64::NEG_INFINITY;
        let mut worst_ineq = f64::NEG_INFINITY;
        for _ in 0..trials {
            let gamma = 0.05 + 2.0 * rng.gen::<f64>();
            let x = random_vec(&mut rng, dim, 4.0);
            let z = random_vec(&mut rng, dim, 4.0);
            let px = spec.prox(&x, gamma).expect("gamma > 0");
            let pz = spec.prox(&z, gamma).expect("gamma > 0");
            let lhs = dist_sq(&px, &pz).sqrt();
            let rhs = dist_sq(&x, &z).sqrt();
            worst_ne = worst_ne.max(lhs - rhs * (1.0 + 1e-12));

            let mut y = random_vec(&mut rng, dim, 4.0);
            if let ProxSpec::IndicatorBall { center, radius } = &spec {
                // Pull y inside the ball.
                let d = dist_sq(&y, center).sqrt();
                let c = rng.gen::<f64>() * radius / d.max(1e-300);
                y = center.iter().zip(&y).map(|(ci, yi)| ci + c * (yi - ci)).collect();
            }
            let a = sub(&px, &x);
            let b = sub(&y, &px);
            let gap = dot(&a, &b) - gamma * (spec.value(&px) - spec.value(&y));
            worst_ineq = worst_ineq.max(-gap - 1e-10);
        }
        out.push(PropertyCheck {
            variant: name.into(),
            property: "nonexpansive".into(),
            trials,
            worst: worst_ne,
            pass: worst_ne <= 0.0,
        });
        out.push(PropertyCheck {
            variant: name.into(),
            property: "prox_inequality".into(),
            trials,
            worst: worst_ineq,
            pass: worst_ineq <= 0.0,
        });
    }
    out
}
