//! Step engines and run loops.

pub mod min;
pub mod vi;

use serde::{Deserialize, Serialize};

use crate::harness::topology::{ShiftBank, TopologyMode};
use crate::noise::{derive_stream, RandomStream};
use crate::operators::clip_in_place;
use crate::trace::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Star,
    SgdShift,
    SstmShift,
    RestartedSstm,
    SgdaShift,
    SegShift,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Star => "star",
            Method::SgdShift => "sgd_shift",
            Method::SstmShift => "sstm_shift",
            Method::RestartedSstm => "restarted_sstm",
            Method::SgdaShift => "sgda_shift",
            Method::SegShift => "seg_shift",
        }
    }

    pub fn is_vi(self) -> bool {
        matches!(self, Method::SgdaShift | Method::SegShift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftInit {
    #[default]
    Zeros,
    /// `h_i⁰ = ∇f_i(x⁰)` (or `F_i(x⁰)`), noiseless.
    ExactGradAtX0,
}

/// How the naive method combines worker gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaiveClip {
    /// Clip the average of the stochastic gradients.
    #[default]
    Mean,
    /// Average the individually clipped gradients.
    PerWorker,
}

/// Which trial a run belongs to; worker, step and draw complete the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamKey {
    pub root_seed: u64,
    pub trial: u64,
}

impl StreamKey {
    pub fn new(root_seed: u64, trial: u64) -> Self {
        Self { root_seed, trial }
    }

    pub fn stream(&self, worker: usize, step: usize, draw: u64) -> RandomStream {
        derive_stream(self.root_seed, self.trial, worker as u64, step as u64, draw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub metrics: Vec<Metric>,
    /// Recording cadence; `None` uses `max(1, K/1000)`.
    pub thinning: Option<usize>,
    pub topology: TopologyMode,
    /// Radius of the restricted gap; defaults to `√V` of the schedule.
    pub gap_radius: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { metrics: vec![Metric::SqDist], thinning: None, topology: TopologyMode::default(), gap_radius: None }
    }
}

/// `Δ_i = clip(sample_i − h_i, λ)` for every worker, where `oracle(i, out)`
/// writes worker `i`'s stochastic sample.
pub(crate) fn clipped_deltas<F>(bank: &ShiftBank, dim: usize, lambda: f64, mut oracle: F) -> Vec<Vec<f64>>
where
    F: FnMut(usize, &mut [f64]),
{
    (0..bank.n())
        .map(|i| {
            let mut d = vec![0.0; dim];
            oracle(i, &mut d);
            for (dj, hj) in d.iter_mut().zip(bank.shift(i)) {
                *dj -= hj;
            }
            clip_in_place(&mut d, lambda);
            d
        })
        .collect()
}

/// `prox_{γΨ}(x − γ g)` in place.
pub(crate) fn prox_step(psi: &crate::operators::ProxSpec, x: &mut [f64], gamma: f64, g: &[f64]) {
    for (xj, gj) in x.iter_mut().zip(g) {
        *xj -= gamma * gj;
    }
    psi.prox_in_place(x, gamma);
}

/// `(1/n) Σ ‖h_i − target_i‖²`.
pub(crate) fn shift_error(shifts: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let s: f64 = shifts.iter().zip(targets).map(|(h, t)| crate::linalg::dist_sq(h, t)).sum();
    s / shifts.len() as f64
}
