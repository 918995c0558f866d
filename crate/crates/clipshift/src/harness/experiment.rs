//! JSON run configs, multi-trial execution and quantile aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{param, Error, Result};
use crate::linalg::dist_sq;
use crate::noise::{derive_stream, estimate_central_alpha_moment, NoiseFamily, NoiseSpec};
use crate::params::{schedule_for, ConstantSet, LambdaRule, Schedule, ScheduleOverride, Theorem, TheoryInputs};
use crate::problems::{Problem, ProblemConfig};
use crate::solvers::{min, vi, Method, NaiveClip, RunOptions, ShiftInit, StreamKey};
use crate::trace::{Metric, Trace};

use super::topology::TopologyMode;

fn default_beta() -> f64 {
    0.1
}

/// Theory-derived schedule; problem constants (`L`, `μ`, `ℓ`, `n`, `ζ*`,
/// `‖x⁰ − x*‖`) are filled in from the problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    pub theorem: Theorem,
    #[serde(default)]
    pub constants: ConstantSet,
    /// Horizon used by the formulas; defaults to the solver's step count.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Moment order; defaults to the Lévy index for `levy_stable` noise and 2
    /// otherwise.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Defaults to a Monte-Carlo estimate from the problem's noise.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub ell: Option<f64>,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default)]
    pub shift_err: Option<f64>,
    #[serde(default)]
    pub epsilon_target: Option<f64>,
    #[serde(default)]
    pub overrides: ScheduleOverride,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSource {
    Manual {
        gamma: f64,
        #[serde(default)]
        nu: f64,
        lambda: f64,
    },
    Theory(TheorySpec),
    Fixed {
        schedule: Schedule,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub method: Method,
    pub schedule: ScheduleSource,
    /// Defaults to `exact_grad_at_x0` for the restarted method, zeros otherwise.
    #[serde(default)]
    pub shift_init: Option<ShiftInit>,
    #[serde(default)]
    pub naive_clip: NaiveClip,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub steps: Option<usize>,
}

impl SolverSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.name().to_string())
    }
}

fn default_trials() -> usize {
    1
}
fn default_steps() -> usize {
    1000
}
fn default_metrics() -> Vec<Metric> {
    vec![Metric::SqDist]
}
fn default_quantiles() -> Vec<f64> {
    vec![0.5, 0.9]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub thinning: Option<usize>,
    #[serde(default = "default_quantiles")]
    pub quantiles: Vec<f64>,
    #[serde(default)]
    pub topology: TopologyMode,
    #[serde(default)]
    pub gap_radius: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            root_seed: 0,
            steps: default_steps(),
            metrics: default_metrics(),
            thinning: None,
            quantiles: default_quantiles(),
            topology: TopologyMode::default(),
            gap_radius: None,
            threads: None,
        }
    }
}

fn default_name() -> String {
    "run".into()
}

/// A complete experiment: one problem, the solvers to compare, and the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemConfig,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub plan: PlanConfig,
}

/// Sets `a.b.0.c = value` inside a JSON document. Values that parse as JSON
/// are used as such; anything else is taken as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override path `{path}`")));
    }
    let mut cur = doc;
    for (i, k) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = k.parse().map_err(|_| Error::Config(format!("`{k}` in `{path}` is not an index")))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("index {idx} out of range ({len}) in `{path}`")))?
            }
            Value::Object(map) => {
                if last {
                    map.insert(k.to_string(), value);
                    return Ok(());
                }
                map.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            _ => return Err(Error::Config(format!("`{path}` descends into a scalar"))),
        };
        if last {
            *cur = value;
            return Ok(());
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::from_json(&self.to_json(), overrides)
    }
}

/// A solver with its problem-specific schedule, start point and horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSolver {
    pub label: String,
    pub method: Method,
    pub schedule: Schedule,
    pub shift_init: ShiftInit,
    pub naive_clip: NaiveClip,
    pub x0: Vec<f64>,
    pub steps: usize,
}

/// σ from `E‖ξ‖^α` over 10⁵ draws on a fixed reserved stream.
pub fn estimate_sigma(noise: &NoiseSpec, dim: usize, alpha: f64) -> Result<f64> {
    if noise.is_silent() {
        return Ok(0.0);
    }
    let infinite = match noise.family {
        NoiseFamily::LevyStable => noise.alpha < 2.0 && alpha >= noise.alpha,
        NoiseFamily::StudentT => alpha >= noise.alpha,
        _ => false,
    };
    if infinite {
        return param(format!(
            "the {alpha}-th noise moment is infinite for this noise; give sigma explicitly or a smaller alpha"
        ));
    }
    let stream = derive_stream(0, u64::MAX, 0, 0, 0);
    Ok(estimate_central_alpha_moment(noise, dim, alpha, 100_000, &stream)?.powf(1.0 / alpha))
}

/// Fills [`TheoryInputs`] for a solver from the problem.
pub fn theory_inputs(problem: &Problem, spec: &TheorySpec, x0: &[f64], steps: usize) -> Result<TheoryInputs> {
    let xs = problem
        .x_star()
        .ok_or_else(|| Error::Unsupported("theory schedules need a known solution".into()))?;
    let (l, mu, ell, zeta) = match problem {
        Problem::Min(p) => (p.l, p.mu, spec.ell, p.zeta_star.unwrap_or(0.0)),
        Problem::Vi(p) => (p.l, p.mu, spec.ell.or(p.ell), p.zeta_star().unwrap_or(0.0)),
    };
    let noise = problem.noise();
    let alpha = spec.alpha.unwrap_or(match noise.family {
        NoiseFamily::LevyStable => noise.alpha,
        _ => 2.0,
    });
    let sigma = match spec.sigma {
        Some(s) => s,
        None => estimate_sigma(noise, problem.dim(), alpha)?,
    };
    Ok(TheoryInputs {
        l,
        mu,
        ell,
        sigma,
        alpha,
        n: problem.n(),
        k: spec.k.unwrap_or(steps).max(1),
        beta: spec.beta,
        r: dist_sq(x0, xs).sqrt(),
        v: spec.v,
        zeta_star: zeta,
        shift_err: spec.shift_err,
        constants: spec.constants,
    })
}

pub fn resolve_schedule(problem: &Problem, source: &ScheduleSource, x0: &[f64], steps: usize) -> Result<Schedule> {
    match source {
        ScheduleSource::Manual { gamma, nu, lambda } => Ok(Schedule::manual(*gamma, *nu, *lambda)),
        ScheduleSource::Fixed { schedule } => Ok(schedule.clone()),
        ScheduleSource::Theory(spec) => {
            let inputs = theory_inputs(problem, spec, x0, steps)?;
            let s = schedule_for(spec.theorem, &inputs, spec.epsilon_target)?;
            Ok(s.with_override(&spec.overrides))
        }
    }
}

pub fn resolve_solver(problem: &Problem, spec: &SolverSpec, plan: &PlanConfig) -> Result<ResolvedSolver> {
    let x0 = match &spec.x0 {
        Some(x) => x.clone(),
        None => problem.default_x0()?,
    };
    let steps = spec.steps.unwrap_or(plan.steps);
    let schedule = resolve_schedule(problem, &spec.schedule, &x0, steps)?;
    let shift_init = spec.shift_init.unwrap_or(match spec.method {
        Method::RestartedSstm => ShiftInit::ExactGradAtX0,
        _ => ShiftInit::Zeros,
    });
    let steps = match (&spec.method, &schedule.restart) {
        (Method::RestartedSstm, Some(plan)) => plan.total_steps,
        _ => steps,
    };
    Ok(ResolvedSolver { label: spec.label(), method: spec.method, schedule, shift_init, naive_clip: spec.naive_clip, x0, steps })
}

impl ResolvedSolver {
    pub fn run(&self, problem: &Problem, opts: &RunOptions, key: StreamKey) -> Result<Trace> {
        if self.method.is_vi() {
            let cfg = vi::ViSolverConfig {
                method: self.method,
                schedule: self.schedule.clone(),
                shift_init: self.shift_init,
                x0: self.x0.clone(),
                steps: self.steps,
            };
            vi::run(problem.as_vi()?, &cfg, opts, key, &self.label)
        } else {
            let cfg = min::MinSolverConfig {
                method: self.method,
                schedule: self.schedule.clone(),
                shift_init: self.shift_init,
                x0: self.x0.clone(),
                steps: self.steps,
                naive_clip: self.naive_clip,
            };
            min::run(problem.as_min()?, &cfg, opts, key, &self.label)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub solver: String,
    pub metric: Metric,
    pub quantile: f64,
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
}

impl QuantileCurve {
    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn at(&self, step: usize) -> Option<f64> {
        self.steps.iter().position(|&s| s == step).map(|i| self.values[i])
    }
}

/// Linear-interpolation sample quantile (type 7). NaNs are ignored; an
/// all-NaN sample gives NaN.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi || v[lo] == v[hi] {
        return v[lo];
    }
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Quantile curves for one solver's traces. All traces must share their
/// recorded steps.
pub fn aggregate(label: &str, traces: &[&Trace], metrics: &[Metric], quantiles: &[f64]) -> Result<Vec<QuantileCurve>> {
    let Some(first) = traces.first() else {
        return Ok(Vec::new());
    };
    if traces.iter().any(|t| t.steps != first.steps) {
        return Err(Error::Numerical(format!("trials of {label} recorded different steps")));
    }
    let mut out = Vec::new();
    for &m in metrics {
        let cols: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| t.column(m).ok_or_else(|| Error::Config(format!("metric {} not recorded", m.name()))))
            .collect::<Result<_>>()?;
        for &q in quantiles {
            let values = (0..first.steps.len())
                .map(|r| quantile(&cols.iter().map(|c| c[r]).collect::<Vec<_>>(), q))
                .collect();
            out.push(QuantileCurve { solver: label.to_string(), metric: m, quantile: q, steps: first.steps.clone(), values });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub solvers: Vec<ResolvedSolver>,
    /// Solver-major, then trial order.
    pub traces: Vec<Trace>,
    pub curves: Vec<QuantileCurve>,
}

impl ExperimentResult {
    pub fn curve(&self, solver: &str, metric: Metric, q: f64) -> Option<&QuantileCurve> {
        self.curves.iter().find(|c| c.solver == solver && c.metric == metric && c.quantile == q)
    }

    pub fn traces_of<'a>(&'a self, solver: &'a str) -> impl Iterator<Item = &'a Trace> + 'a {
        self.traces.iter().filter(move |t| t.solver == solver)
    }
}

pub fn validate_plan(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.plan;
    if p.trials < 1 {
        return param("plan.trials must be at least 1");
    }
    if cfg.solvers.is_empty() {
        return param("at least one solver is required");
    }
    if p.metrics.is_empty() {
        return param("at least one metric is required");
    }
    if p.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return param("quantiles must lie in [0, 1]");
    }
    if p.thinning == Some(0) {
        return param("thinning must be positive");
    }
    let mut labels: Vec<String> = cfg.solvers.iter().map(SolverSpec::label).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return param("solver labels must be unique");
    }
    Ok(())
}

/// Runs every solver for `plan.trials` trials. Trial `t` of every solver uses
/// the streams of path `(root_seed, t, ·, ·, ·)`.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult> {
    validate_plan(cfg)?;
    let problem = cfg.problem.build()?;
    let plan = &cfg.plan;
    let solvers: Vec<ResolvedSolver> =
        cfg.solvers.iter().map(|s| resolve_solver(&problem, s, plan)).collect::<Result<_>>()?;
    let opts = RunOptions {
        metrics: plan.metrics.clone(),
        thinning: plan.thinning,
        topology: plan.topology,
        gap_radius: plan.gap_radius,
    };
    let jobs: Vec<(usize, u64)> =
        (0..solvers.len()).flat_map(|s| (0..plan.trials as u64).map(move |t| (s, t))).collect();
    let work = || -> Vec<Result<Trace>> {
        jobs.par_iter()
            .map(|&(s, t)| {
                solvers[s].run(&problem, &opts, StreamKey::new(plan.root_seed, t)).map_err(|e| Error::Trial {
                    solver: solvers[s].label.clone(),
                    trial: t,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let results = match plan.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let traces: Vec<Trace> = results.into_iter().collect::<Result<_>>()?;
    let mut curves = Vec::new();
    for s in &solvers {
        let ts: Vec<&Trace> = traces.iter().filter(|t| t.solver == s.label).collect();
        curves.extend(aggregate(&s.label, &ts, &plan.metrics, &plan.quantiles)?);
    }
    Ok(ExperimentResult { name: cfg.name.clone(), solvers, traces, curves })
}

pub const FIGURE1_LAMBDAS: [f64; 3] = [0.1, 0.01, 0.001];

/// Ball-constrained quadratic in d = 10 with α = 1.5 Lévy noise, comparing the
/// naive method, the exact-shift method and learned shifts at γ = 0.001.
pub fn figure1_preset(lambda: f64) -> Result<RunConfig> {
    if !FIGURE1_LAMBDAS.contains(&lambda) {
        return param(format!("figure 1 lambda must be one of 0.1, 0.01, 0.001, got {lambda}"));
    }
    let manual = |nu: f64| ScheduleSource::Manual { gamma: 0.001, nu, lambda };
    let solver = |method: Method, nu: f64| SolverSpec {
        label: None,
        method,
        schedule: manual(nu),
        shift_init: None,
        naive_clip: NaiveClip::Mean,
        x0: None,
        steps: None,
    };
    Ok(RunConfig {
        name: format!("figure1_lambda_{lambda}"),
        problem: ProblemConfig::BallQuadratic {
            dim: 10,
            n: 1,
            center_value: 3.0,
            radius: 1.0,
            noise: NoiseSpec::levy(1.5, 1.0),
        },
        solvers: vec![solver(Method::Naive, 0.0), solver(Method::Star, 0.0), solver(Method::SgdShift, 0.1)],
        plan: PlanConfig {
            trials: 20,
            steps: 200_000,
            metrics: vec![Metric::SqDist],
            quantiles: vec![0.5, 0.9],
            ..PlanConfig::default()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    N,
    Alpha,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::N => "n",
            SweepAxis::Alpha => "alpha",
        }
    }
}

/// One config per value; all cells keep the base seed.
pub fn sweep_configs(base: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<RunConfig>> {
    values
        .iter()
        .map(|&v| {
            let mut cfg = base.clone();
            cfg.name = format!("{}/{}={}", base.name, axis.name(), v);
            match axis {
                SweepAxis::Lambda => {
                    for s in &mut cfg.solvers {
                        match &mut s.schedule {
                            ScheduleSource::Manual { lambda, .. } => *lambda = v,
                            ScheduleSource::Theory(t) => t.overrides.lambda = Some(LambdaRule::Constant { value: v }),
                            ScheduleSource::Fixed { schedule } => schedule.lambda = LambdaRule::Constant { value: v },
                        }
                    }
                }
                SweepAxis::N => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return param(format!("worker count must be a positive integer, got {v}"));
                    }
                    cfg.problem.set_n(v as usize);
                }
                SweepAxis::Alpha => {
                    let noise = cfg.problem.noise_mut();
                    if noise.family != NoiseFamily::LevyStable {
                        return param("alpha sweeps need levy_stable noise");
                    }
                    noise.alpha = v;
                    noise.validate()?;
                }
            }
            Ok(cfg)
        })
        .collect()
}
