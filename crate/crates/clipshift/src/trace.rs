//! Recorded metric rows of a single run.

use serde::{Deserialize, Serialize};

use crate::harness::topology::MessageCount;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `‖x − x*‖²` at the method's output point (`y` for SSTM).
    SqDist,
    /// `Φ − Φ*` at the output point.
    ObjGap,
    /// `Φ − Φ*` at the running average of `x¹, …, x^k`.
    AvgObjGap,
    /// Restricted gap at `x_avg` (SGDA) or `x̃_avg` (SEG).
    RestrictedGap,
    /// `(1/n) Σ ‖h_i − ∇f_i(x*)‖²`, averaged over both families for SEG.
    ShiftLyapunov,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::SqDist => "sq_dist",
            Metric::ObjGap => "obj_gap",
            Metric::AvgObjGap => "avg_obj_gap",
            Metric::RestrictedGap => "restricted_gap",
            Metric::ShiftLyapunov => "shift_lyapunov",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Metric::SqDist, Metric::ObjGap, Metric::AvgObjGap, Metric::RestrictedGap, Metric::ShiftLyapunov]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Recording cadence: every `max(1, K/1000)` steps unless configured, plus
/// the initial and final step.
pub fn default_thinning(steps: usize) -> usize {
    (steps / 1000).max(1)
}

pub fn should_record(step: usize, steps: usize, thinning: usize) -> bool {
    step == 0 || step == steps || step % thinning == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub solver: String,
    pub trial: u64,
    pub metrics: Vec<Metric>,
    pub steps: Vec<usize>,
    /// `values[r][m]` is metric `m` at recorded row `r`. Failed evaluations
    /// are stored as NaN.
    pub values: Vec<Vec<f64>>,
    pub messages: MessageCount,
    pub final_x: Vec<f64>,
}

impl Trace {
    pub fn new(solver: &str, trial: u64, metrics: &[Metric]) -> Self {
        Self {
            solver: solver.to_string(),
            trial,
            metrics: metrics.to_vec(),
            steps: Vec::new(),
            values: Vec::new(),
            messages: MessageCount::default(),
            final_x: Vec::new(),
        }
    }

    pub fn push(&mut self, step: usize, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.metrics.len());
        self.steps.push(step);
        self.values.push(row);
    }

    pub fn column(&self, metric: Metric) -> Option<Vec<f64>> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        Some(self.values.iter().map(|r| r[j]).collect())
    }

    /// Value of `metric` at the recorded `step`.
    pub fn at(&self, metric: Metric, step: usize) -> Option<f64> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        let r = self.steps.iter().position(|&s| s == step)?;
        Some(self.values[r][j])
    }

    pub fn last(&self, metric: Metric) -> Option<f64> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        self.values.last().map(|r| r[j])
    }
}
