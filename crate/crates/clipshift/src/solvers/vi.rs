//! Distributed clipped SGDA and extragradient with learned shifts.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::harness::topology::{RoundTopology, ShiftBank};
use crate::linalg::RunningMean;
use crate::params::Schedule;
use crate::problems::VIProblem;
use crate::trace::{default_thinning, should_record, Metric, Trace};

use super::{clipped_deltas, prox_step, shift_error, Method, RunOptions, ShiftInit, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViSolverConfig {
    pub method: Method,
    pub schedule: Schedule,
    #[serde(default)]
    pub shift_init: ShiftInit,
    pub x0: Vec<f64>,
    pub steps: usize,
}

impl ViSolverConfig {
    pub fn validate(&self, p: &VIProblem) -> Result<()> {
        if self.x0.len() != p.dim {
            return param(format!("x0 has length {}, problem dimension is {}", self.x0.len(), p.dim));
        }
        if !self.method.is_vi() {
            return Err(Error::Unsupported(format!("{} is not a VI method", self.method.name())));
        }
        self.schedule.validate(self.steps)
    }
}

#[derive(Debug, Clone)]
pub struct VIState {
    pub k: usize,
    pub x: Vec<f64>,
    /// Last extrapolated point (SEG only).
    pub x_tilde: Vec<f64>,
    /// `h_i` for SGDA, `h̃_i` for SEG.
    pub shifts: ShiftBank,
    /// `ĥ_i` (SEG only).
    pub shifts_hat: Option<ShiftBank>,
    /// Average of `x⁰, …, x^k`.
    pub x_avg: RunningMean,
    /// Average of `x̃⁰, …, x̃^{k−1}`.
    pub x_tilde_avg: RunningMean,
}

impl VIState {
    pub fn new(p: &VIProblem, cfg: &ViSolverConfig, topo: &mut RoundTopology) -> Result<Self> {
        let init = match cfg.shift_init {
            ShiftInit::Zeros => vec![vec![0.0; p.dim]; p.n],
            ShiftInit::ExactGradAtX0 => {
                (0..p.n).map(|i| p.operator_value(i, &cfg.x0, None)).collect::<Result<_>>()?
            }
        };
        let hat = (cfg.method == Method::SegShift).then(|| ShiftBank::new(init.clone()));
        Self::with_shifts(p, &cfg.x0, ShiftBank::new(init), hat, topo)
    }

    /// State at `x0` with the given shift families, attached to `topo`.
    pub fn with_shifts(
        p: &VIProblem,
        x0: &[f64],
        mut shifts: ShiftBank,
        mut shifts_hat: Option<ShiftBank>,
        topo: &mut RoundTopology,
    ) -> Result<Self> {
        topo.attach(&mut shifts)?;
        if let Some(h) = shifts_hat.as_mut() {
            topo.attach(h)?;
        }
        let mut x_avg = RunningMean::new(p.dim);
        x_avg.push(x0);
        Ok(Self {
            k: 0,
            x: x0.to_vec(),
            x_tilde: x0.to_vec(),
            shifts,
            shifts_hat,
            x_avg,
            x_tilde_avg: RunningMean::new(p.dim),
        })
    }

    /// Point the restricted gap is evaluated at.
    pub fn gap_point(&self, method: Method) -> &[f64] {
        let avg = match method {
            Method::SegShift => self.x_tilde_avg.get(),
            _ => self.x_avg.get(),
        };
        avg.unwrap_or(&self.x)
    }
}

/// `Δ_i = clip(F_{ξ_i}(x) − h_i, λ_k)`, `x⁺ = prox_{γΨ}(x − γ(1/n)Σ(h_i + Δ_i))`,
/// `h_i ← h_i + ν Δ_i`.
pub fn step_sgda_shift(
    p: &VIProblem,
    st: &mut VIState,
    s: &Schedule,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let k = st.k;
    let x = &st.x;
    let deltas = clipped_deltas(&st.shifts, p.dim, s.lambda_at(k), |i, out| {
        p.operator_into(i, x, Some(&key.stream(i, k, 0)), out)
    });
    let g = topo.round(&mut st.shifts, &deltas, s.nu_at(k))?;
    prox_step(&p.psi, &mut st.x, s.gamma, &g);
    st.x_avg.push(&st.x);
    st.k += 1;
    Ok(())
}

/// Extrapolate with `h̃`-shifted clipped estimates at `x`, then update `x`
/// with `ĥ`-shifted clipped estimates at `x̃`. Draws 0 and 1 feed the two
/// phases.
pub fn step_seg_shift(
    p: &VIProblem,
    st: &mut VIState,
    s: &Schedule,
    topo: &mut RoundTopology,
    key: &StreamKey,
) -> Result<()> {
    let k = st.k;
    let lambda = s.lambda_at(k);
    let nu = s.nu_at(k);
    let hat = st
        .shifts_hat
        .as_mut()
        .ok_or_else(|| Error::Precondition("extragradient needs two shift families".into()))?;

    let x = &st.x;
    let d1 = clipped_deltas(&st.shifts, p.dim, lambda, |i, out| {
        p.operator_into(i, x, Some(&key.stream(i, k, 0)), out)
    });
    let g1 = topo.round(&mut st.shifts, &d1, nu)?;
    let mut xt = st.x.clone();
    prox_step(&p.psi, &mut xt, s.gamma, &g1);

    let d2 = clipped_deltas(hat, p.dim, lambda, |i, out| {
        p.operator_into(i, &xt, Some(&key.stream(i, k, 1)), out)
    });
    let g2 = topo.round(hat, &d2, nu)?;
    prox_step(&p.psi, &mut st.x, s.gamma, &g2);

    st.x_tilde_avg.push(&xt);
    st.x_tilde = xt;
    st.x_avg.push(&st.x);
    st.k += 1;
    Ok(())
}

pub fn step(p: &VIProblem, method: Method, st: &mut VIState, s: &Schedule, topo: &mut RoundTopology, key: &StreamKey) -> Result<()> {
    match method {
        Method::SgdaShift => step_sgda_shift(p, st, s, topo, key),
        Method::SegShift => step_seg_shift(p, st, s, topo, key),
        m => Err(Error::Unsupported(format!("{} is not a VI method", m.name()))),
    }
}

pub(crate) fn check_metrics(p: &VIProblem, metrics: &[Metric]) -> Result<()> {
    for m in metrics {
        match m {
            Metric::ObjGap | Metric::AvgObjGap => {
                return Err(Error::Unsupported(format!("{} applies to minimization problems", m.name())))
            }
            _ if p.x_star.is_none() => {
                return Err(Error::Unsupported(format!("{} needs a known solution", m.name())))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Gap radius: explicit, else `√V` of the schedule, else `‖x⁰ − x*‖`.
pub fn gap_radius(p: &VIProblem, cfg: &ViSolverConfig, opts: &RunOptions) -> Result<f64> {
    if let Some(r) = opts.gap_radius {
        return Ok(r);
    }
    if let Some(v) = cfg.schedule.v {
        return Ok(v.sqrt());
    }
    Ok(p.sq_dist(&cfg.x0)?.sqrt())
}

fn metric_row(p: &VIProblem, method: Method, st: &VIState, radius: f64, metrics: &[Metric]) -> Vec<f64> {
    metrics
        .iter()
        .map(|m| match m {
            Metric::SqDist => p.sq_dist(&st.x).unwrap_or(f64::NAN),
            Metric::RestrictedGap => p.restricted_gap(st.gap_point(method), radius).unwrap_or(f64::NAN),
            Metric::ShiftLyapunov => match p.operators_at_x_star() {
                Some(t) => {
                    let a = shift_error(st.shifts.shifts(), &t);
                    match &st.shifts_hat {
                        Some(h) => 0.5 * (a + shift_error(h.shifts(), &t)),
                        None => a,
                    }
                }
                None => f64::NAN,
            },
            Metric::ObjGap | Metric::AvgObjGap => f64::NAN,
        })
        .collect()
}

pub fn run(p: &VIProblem, cfg: &ViSolverConfig, opts: &RunOptions, key: StreamKey, label: &str) -> Result<Trace> {
    cfg.validate(p)?;
    check_metrics(p, &opts.metrics)?;
    let radius = gap_radius(p, cfg, opts)?;
    let thin = opts.thinning.unwrap_or_else(|| default_thinning(cfg.steps)).max(1);
    let mut topo = RoundTopology::new(opts.topology, p.n, p.dim);
    let mut trace = Trace::new(label, key.trial, &opts.metrics);
    let mut st = VIState::new(p, cfg, &mut topo)?;
    trace.push(0, metric_row(p, cfg.method, &st, radius, &opts.metrics));
    for _ in 0..cfg.steps {
        step(p, cfg.method, &mut st, &cfg.schedule, &mut topo, &key)?;
        if should_record(st.k, cfg.steps, thin) {
            trace.push(st.k, metric_row(p, cfg.method, &st, radius, &opts.metrics));
        }
    }
    trace.messages = topo.messages;
    trace.final_x = st.x.clone();
    Ok(trace)
}
