//! Composite minimization: naive clipped Prox-SGD, the method with the exact
//! optimal shift, distributed clipped SGD with learned shifts, the
//! accelerated similar-triangles variant and its restarted driver.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::harness::topology::{RoundTopology, ShiftBank};
use crate::linalg::RunningMean;
use crate::operators::clip_in_place;
use crate::params::Schedule;
use crate::problems::CompositeProblem;
use crate::trace::{default_thinning, should_record, Metric, Trace};

use super::{clipped_deltas, prox_step, shift_error, Method, NaiveClip, RunOptions, ShiftInit, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinSolverConfig {
    pub method: Method,
    pub schedule: Schedule,
    #[serde(default)]
    pub shift_init: ShiftInit,
    pub x0: Vec<f64>,
    /// Ignored by the restarted driver, which runs its plan's total.
    pub steps: usize,
    #[serde(default)]
    pub naive_clip: NaiveClip,
}

impl MinSolverConfig {
    pub fn validate(&self, p: &CompositeProblem) -> Result<()> {
        if self.x0.len() != p.dim {
            return param(format!("x0 has length {}, problem dimension is {}", self.x0.len(), p.dim));
        }
        match self.method {
            Method::Star if p.x_star.is_none() => {
                return Err(Error::Precondition("star method needs a known minimizer".into()))
            }
            Method::SstmShift if self.schedule.sstm.is_none() => {
                return Err(Error::Precondition("sstm_shift needs SSTM coefficients in the schedule".into()))
            }
            Method::RestartedSstm => {
                if self.shift_init != ShiftInit::ExactGradAtX0 {
                    return Err(Error::Precondition("restarted SSTM needs shift_init = exact_grad_at_x0".into()));
                }
                let plan = self
                    .schedule
                    .restart
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("restarted SSTM needs a restart plan".into()))?;
                for st in &plan.stages {
                    st.schedule.validate(st.k_t)?;
                }
                return Ok(());
            }
            Method::SgdaShift | Method::SegShift => {
                return Err(Error::Unsupported(format!("{} is a VI method", self.method.name())))
            }
            _ => {}
        }
        self.schedule.validate(self.steps)
    }

    pub fn total_steps(&self) -> usize {
        match (&self.method, &self.schedule.restart) {
            (Method::RestartedSstm, Some(plan)) => plan.total_steps,
            _ => self.steps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinState {
    /// Step index within the current schedule (stage).
    pub k: usize,
    /// Global step index, used for stream derivation.
    pub t: usize,
    /// Current iterate; for SSTM the last gradient point `x^k`.
    pub x: Vec<f64>,
    /// SSTM sequences; empty for the SGD family.
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub shifts: ShiftBank,
    /// Running average of `x¹, …, x^k` (of `y` for SSTM).
    pub x_bar: RunningMean,
}

impl MinState {
    pub fn new(p: &CompositeProblem, cfg: &MinSolverConfig, topo: &mut RoundTopology) -> Result<Self> {
        let shifts = match cfg.method {
            Method::Naive => ShiftBank::zeros(p.n, p.dim),
            Method::Star => ShiftBank::new(p.grads_at_x_star().expect("validated")),
            _ => initial_shifts(p, &cfg.x0, cfg.shift_init)?,
        };
        let sstm = matches!(cfg.method, Method::SstmShift | Method::RestartedSstm);
        let mut st = Self {
            k: 0,
            t: 0,
            x: cfg.x0.clone(),
            y: if sstm { cfg.x0.clone() } else { Vec::new() },
            z: if sstm { cfg.x0.clone() } else { Vec::new() },
            shifts,
            x_bar: RunningMean::new(p.dim),
        };
        if cfg.method != Method::Naive {
            topo.attach(&mut st.shifts)?;
        }
        Ok(st)
    }

    /// The point metrics are evaluated at.
    pub fn output(&self) -> &[f64] {
        if self.y.is_empty() {
            &self.x
        } else {
            &self.y
        }
    }
}

fn initial_shifts(p: &CompositeProblem, x0: &[f64], init: ShiftInit) -> Result<ShiftBank> {
    Ok(match init {
        ShiftInit::Zeros => ShiftBank::zeros(p.n, p.dim),
        ShiftInit::ExactGradAtX0 => ShiftBank::new((0..p.n).map(|i| p.full_grad(i, x0)).collect::<Result<_>>()?),
    })
}

fn finish_step(st: &mut MinState) {
    st.k += 1;
    st.t += 1;
    let out = st.output().to_vec();
    st.x_bar.push(&out);
}

/// `x⁺ = prox_{γΨ}(x − γ·clip(ĝ, λ_k))`. With [`NaiveClip::Mean`] `ĝ` is the
/// average stochastic gradient; with [`NaiveClip::PerWorker`] the workers clip
/// before averaging.
pub fn step_naive(
    p: &CompositeProblem,
    st: &mut MinState,
    s: &Schedule,
    variant: NaiveClip,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let lambda = s.lambda_at(st.k);
    let samples: Vec<Vec<f64>> = (0..p.n)
        .map(|i| {
            let mut g = vec![0.0; p.dim];
            p.stoch_grad_into(i, &st.x, &key.stream(i, st.t, 0), &mut g);
            if variant == NaiveClip::PerWorker {
                clip_in_place(&mut g, lambda);
            }
            g
        })
        .collect();
    let mut g = topo.mean(&samples)?;
    if variant == NaiveClip::Mean {
        clip_in_place(&mut g, lambda);
    }
    prox_step(&p.psi, &mut st.x, s.gamma, &g);
    finish_step(st);
    Ok(())
}

fn shifted_step(
    p: &CompositeProblem,
    st: &mut MinState,
    s: &Schedule,
    nu: f64,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let lambda = s.lambda_at(st.k);
    let x = &st.x;
    let t = st.t;
    let deltas = clipped_deltas(&st.shifts, p.dim, lambda, |i, out| {
        p.stoch_grad_into(i, x, &key.stream(i, t, 0), out)
    });
    let g = topo.round(&mut st.shifts, &deltas, nu)?;
    prox_step(&p.psi, &mut st.x, s.gamma, &g);
    finish_step(st);
    Ok(())
}

/// Shifts fixed at `∇f_i(x*)`: `g̃ = ∇f(x*) + clip(∇f_ξ(x) − ∇f(x*), λ_k)`.
pub fn step_star(p: &CompositeProblem, st: &mut MinState, s: &Schedule, topo: &mut RoundTopology, key: &StreamKey) -> Result<()> {
    shifted_step(p, st, s, 0.0, topo, key)
}

/// `Δ_i = clip(∇f_{ξ_i}(x) − h_i, λ_k)`, `x⁺ = prox_{γΨ}(x − γ(1/n)Σ(h_i + Δ_i))`,
/// `h_i ← h_i + ν Δ_i`.
pub fn step_sgd_shift(
    p: &CompositeProblem,
    st: &mut MinState,
    s: &Schedule,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let nu = s.nu_at(st.k);
    shifted_step(p, st, s, nu, topo, key)
}

/// One similar-triangles step with clipped shifted gradients at the
/// intermediate point.
pub fn step_sstm_shift(
    p: &CompositeProblem,
    st: &mut MinState,
    s: &Schedule,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let c = s.sstm.ok_or_else(|| Error::Precondition("missing SSTM coefficients".into()))?;
    let k = st.k;
    let alpha = c.alpha(k + 1);
    let a_k = c.big_a(k);
    let a_next = c.big_a(k + 1);
    if k == 0 {
        st.x.clone_from(&st.z);
    } else {
        for j in 0..p.dim {
            st.x[j] = (a_k * st.y[j] + alpha * st.z[j]) / a_next;
        }
    }
    let lambda = s.lambda_at(k);
    let x = &st.x;
    let t = st.t;
    let deltas = clipped_deltas(&st.shifts, p.dim, lambda, |i, out| {
        p.stoch_grad_into(i, x, &key.stream(i, t, 0), out)
    });
    let g = topo.round(&mut st.shifts, &deltas, s.nu_at(k))?;
    prox_step(&p.psi, &mut st.z, alpha, &g);
    if k == 0 {
        st.y.clone_from(&st.z);
    } else {
        for j in 0..p.dim {
            st.y[j] = (a_k * st.y[j] + alpha * st.z[j]) / a_next;
        }
    }
    finish_step(st);
    Ok(())
}

pub fn step(
    p: &CompositeProblem,
    cfg: &MinSolverConfig,
    st: &mut MinState,
    s: &Schedule,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    match cfg.method {
        Method::Naive => step_naive(p, st, s, cfg.naive_clip, topo, key),
        Method::Star => step_star(p, st, s, topo, key),
        Method::SgdShift => step_sgd_shift(p, st, s, topo, key),
        Method::SstmShift | Method::RestartedSstm => step_sstm_shift(p, st, s, topo, key),
        m => Err(Error::Unsupported(format!("{} is a VI method", m.name()))),
    }
}

pub(crate) fn check_metrics(p: &CompositeProblem, metrics: &[Metric]) -> Result<()> {
    for m in metrics {
        match m {
            Metric::RestrictedGap => {
                return Err(Error::Unsupported("restricted_gap applies to VI problems".into()))
            }
            _ if p.x_star.is_none() => {
                return Err(Error::Unsupported(format!("{} needs a known minimizer", m.name())))
            }
            _ => {}
        }
    }
    Ok(())
}

fn metric_row(p: &CompositeProblem, st: &MinState, x0: &[f64], metrics: &[Metric]) -> Vec<f64> {
    let gap = |x: &[f64]| match p.objective_gap(x) {
        Ok(g) if g.feasible => g.value,
        Ok(_) => f64::INFINITY,
        Err(_) => f64::NAN,
    };
    metrics
        .iter()
        .map(|m| match m {
            Metric::SqDist => p.sq_dist(st.output()).unwrap_or(f64::NAN),
            Metric::ObjGap => gap(st.output()),
            Metric::AvgObjGap => gap(st.x_bar.get().unwrap_or(x0)),
            Metric::ShiftLyapunov => {
                p.grads_at_x_star().map_or(f64::NAN, |t| shift_error(st.shifts.shifts(), &t))
            }
            Metric::RestrictedGap => f64::NAN,
        })
        .collect()
}

/// Runs `cfg.steps` steps (or the full restart plan), recording metrics at
/// step 0, every `thinning` steps and at the last step.
pub fn run(p: &CompositeProblem, cfg: &MinSolverConfig, opts: &RunOptions, key: StreamKey, label: &str) -> Result<Trace> {
    cfg.validate(p)?;
    check_metrics(p, &opts.metrics)?;
    let total = cfg.total_steps();
    let thin = opts.thinning.unwrap_or_else(|| default_thinning(total)).max(1);
    let mut topo = RoundTopology::new(opts.topology, p.n, p.dim);
    let mut trace = Trace::new(label, key.trial, &opts.metrics);
    let mut st = MinState::new(p, cfg, &mut topo)?;
    trace.push(0, metric_row(p, &st, &cfg.x0, &opts.metrics));

    let stages: Vec<(Schedule, usize)> = match &cfg.schedule.restart {
        Some(plan) if cfg.method == Method::RestartedSstm => {
            plan.stages.iter().map(|s| (s.schedule.clone(), s.k_t)).collect()
        }
        _ => vec![(cfg.schedule.clone(), cfg.steps)],
    };
    for (idx, (sched, len)) in stages.iter().enumerate() {
        if idx > 0 {
            // Warm start from the previous output with exact shifts.
            let start = st.output().to_vec();
            st.x.clone_from(&start);
            st.y.clone_from(&start);
            st.z.clone_from(&start);
            st.k = 0;
            st.shifts = initial_shifts(p, &start, ShiftInit::ExactGradAtX0)?;
            topo.attach(&mut st.shifts)?;
        }
        for _ in 0..*len {
            step(p, cfg, &mut st, sched, &mut topo, &key)?;
            if should_record(st.t, total, thin) {
                trace.push(st.t, metric_row(p, &st, &cfg.x0, &opts.metrics));
            }
        }
    }
    trace.messages = topo.messages;
    trace.final_x = st.output().to_vec();
    Ok(trace)
}

