//! Parameter schedules derived from the convergence theorems, plus manual
//! schedules and field-wise overrides.
//!
//! Every calculator exists in two constant styles. [`ConstantSet::Explicit`]
//! uses the numeric constants of the full theorem statements verbatim.
//! [`ConstantSet::Unit`] keeps each formula's shape (powers, logarithms, the
//! `max{2, ·}` floors and the decay exponents) but replaces every numeric
//! factor outside a logarithm by 1, which is the rate-level form of the same
//! result. The explicit constants are extremely conservative (stepsizes of
//! order 1e-5 and SSTM `a` of order 1e15), so short desk-scale runs use the
//! unit style.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Stand-in for `B_K` when σ = 0 makes the second branch infinite.
pub const B_MAX: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSet {
    #[default]
    Explicit,
    Unit,
}

impl ConstantSet {
    /// `c` in the explicit style, 1 in the unit style.
    fn k(self, c: f64) -> f64 {
        match self {
            ConstantSet::Explicit => c,
            ConstantSet::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Star,
    SgdShiftQsc,
    SgdShiftConvex,
    Sstm,
    RestartedSstm,
    SgdaMonotone,
    SgdaQsm,
    SegMonotone,
    SegQsm,
}

fn default_beta() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    2.0
}
fn default_n() -> usize {
    1
}

/// Hypotheses of a theorem. `r` bounds `‖x⁰ − x*‖`; `v` (used as `M` by the
/// SSTM calculators) skips the `V` fixed point when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryInputs {
    pub l: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub ell: Option<f64>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default)]
    pub zeta_star: f64,
    /// `√((1/n) Σ ‖h_i⁰ − ∇f_i(x*)‖²)` for the SSTM bound; defaults to
    /// `zeta_star` (zero initial shifts).
    #[serde(default)]
    pub shift_err: Option<f64>,
    #[serde(default)]
    pub constants: ConstantSet,
}

impl TheoryInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return param(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if self.k < 1 {
            return param("K must be at least 1");
        }
        if self.n < 1 {
            return param("n must be at least 1");
        }
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return param(format!("alpha must lie in (1, 2], got {}", self.alpha));
        }
        for (name, v) in [
            ("L", self.l),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("r", self.r),
            ("zeta_star", self.zeta_star),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return param(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        if let Some(e) = self.ell {
            if !(e > 0.0) || !e.is_finite() {
                return param(format!("ell must be positive, got {e}"));
            }
        }
        if let Some(v) = self.v {
            if !(v > 0.0) || !v.is_finite() {
                return param(format!("V/M must be positive, got {v}"));
            }
        } else if !(self.r > 0.0) {
            return param("either r > 0 or an explicit V/M is required");
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    fn need_l(&self) -> Result<f64> {
        if self.l > 0.0 {
            Ok(self.l)
        } else {
            param("L must be positive for this theorem")
        }
    }

    fn need_mu(&self, t: &str) -> Result<f64> {
        if self.mu > 0.0 {
            Ok(self.mu)
        } else {
            Err(Error::Parameter(format!("{t} needs mu > 0; use the monotone/convex schedule instead")))
        }
    }

    fn shift_err(&self) -> f64 {
        self.shift_err.unwrap_or(self.zeta_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    /// Inactive branches (σ = 0, ζ* = 0) are `+∞`, written as `"inf"`.
    #[serde(with = "extended_f64")]
    pub value: f64,
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn branch(name: &str, value: f64) -> Branch {
    Branch { name: name.to_string(), value }
}

/// `b / (σ·…)` branches are inactive when σ = 0.
fn div_or_inf(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn min_branch(branches: &[Branch]) -> f64 {
    branches.iter().map(|b| b.value).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaRule {
    Constant { value: f64 },
    /// `scale · exp(−rate·(1 + k/divisor))`
    ExpDecay { scale: f64, rate: f64, divisor: f64 },
    /// `numerator / α̃_{k+1}` with α̃ from the SSTM coefficients.
    Sstm { numerator: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum NuRule {
    Constant { value: f64 },
    /// Piecewise SSTM rule switching at `K₀`.
    Sstm,
}

/// Similar-triangles coefficients: `α_{k+1} = (k+2)/(2aL)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SstmCoefficients {
    pub a: f64,
    pub l: f64,
    pub c: f64,
    pub k0: usize,
    pub n: usize,
}

impl SstmCoefficients {
    /// `α_j` for `j ≥ 1`; `α_0 = 0`.
    pub fn alpha(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            (j as f64 + 1.0) / (2.0 * self.a * self.l)
        }
    }

    /// `A_k = k(k+3)/(4aL)`.
    pub fn big_a(&self, k: usize) -> f64 {
        let k = k as f64;
        k * (k + 3.0) / (4.0 * self.a * self.l)
    }

    /// `α̃_{k+1}`.
    pub fn alpha_tilde(&self, k: usize) -> f64 {
        if k < self.k0 {
            self.alpha(self.k0 + 1)
        } else {
            self.alpha(k + 1)
        }
    }

    pub fn nu(&self, k: usize) -> f64 {
        let kf = k as f64;
        if k < self.k0 {
            let k0 = self.k0 as f64;
            (kf + 2.0).powi(2) / (self.c * self.c * (k0 + 2.0).powi(2) * self.n as f64)
        } else {
            (2.0 * kf + 5.0) / (kf + 3.0).powi(2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartStage {
    pub t: usize,
    pub m_prev: f64,
    pub m_t: f64,
    pub epsilon_t: f64,
    pub k_t: usize,
    pub k_t_branches: Vec<Branch>,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartPlan {
    pub tau: usize,
    pub epsilon_target: f64,
    pub m: f64,
    pub stages: Vec<RestartStage>,
    pub total_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Stepsize; for SSTM schedules this is `α₁ = 1/(aL)`.
    pub gamma: f64,
    pub nu: NuRule,
    pub lambda: LambdaRule,
    #[serde(default)]
    pub sstm: Option<SstmCoefficients>,
    #[serde(default)]
    pub restart: Option<RestartPlan>,
    #[serde(default)]
    pub theorem: Option<Theorem>,
    #[serde(default)]
    pub constants: Option<ConstantSet>,
    /// Horizon the schedule was computed for.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// The distance bound `V` (or `M`).
    #[serde(default)]
    pub v: Option<f64>,
    /// The log factor `A` of the theorem.
    #[serde(default)]
    pub log_factor: Option<f64>,
    /// Constant in front of the shift term of `V`.
    #[serde(default)]
    pub v_shift_coef: Option<f64>,
    #[serde(default)]
    pub b_k: Option<f64>,
    #[serde(default)]
    pub gamma_branches: Vec<Branch>,
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Field-wise replacement of a computed schedule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverride {
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub nu: Option<NuRule>,
    #[serde(default)]
    pub lambda: Option<LambdaRule>,
}

impl Schedule {
    pub fn manual(gamma: f64, nu: f64, lambda: f64) -> Self {
        Self::bare(gamma, NuRule::Constant { value: nu }, LambdaRule::Constant { value: lambda })
    }

    fn bare(gamma: f64, nu: NuRule, lambda: LambdaRule) -> Self {
        Self {
            gamma,
            nu,
            lambda,
            sstm: None,
            restart: None,
            theorem: None,
            constants: None,
            horizon: None,
            v: None,
            log_factor: None,
            v_shift_coef: None,
            b_k: None,
            gamma_branches: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn with_override(mut self, o: &ScheduleOverride) -> Self {
        if let Some(g) = o.gamma {
            self.gamma = g;
        }
        if let Some(nu) = &o.nu {
            self.nu = nu.clone();
        }
        if let Some(l) = &o.lambda {
            self.lambda = l.clone();
        }
        self
    }

    pub fn lambda_at(&self, k: usize) -> f64 {
        match &self.lambda {
            LambdaRule::Constant { value } => *value,
            LambdaRule::ExpDecay { scale, rate, divisor } => scale * (-rate * (1.0 + k as f64 / divisor)).exp(),
            LambdaRule::Sstm { numerator } => match &self.sstm {
                Some(s) => numerator / s.alpha_tilde(k),
                None => f64::NAN,
            },
        }
    }

    pub fn nu_at(&self, k: usize) -> f64 {
        match &self.nu {
            NuRule::Constant { value } => *value,
            NuRule::Sstm => self.sstm.as_ref().map_or(f64::NAN, |s| s.nu(k)),
        }
    }

    /// Checks γ > 0, ν_k ∈ [0, 1] and 0 < λ_k < ∞ for all `k ≤ steps`.
    pub fn validate(&self, steps: usize) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return param(format!("stepsize must be positive and finite, got {}", self.gamma));
        }
        if matches!(self.lambda, LambdaRule::Sstm { .. }) || matches!(self.nu, NuRule::Sstm) {
            if self.sstm.is_none() {
                return param("SSTM-shaped rules need SSTM coefficients");
            }
        }
        // Every rule is monotone in k on each side of K₀, so the endpoints and
        // the switch points cover all k ≤ steps.
        let mut probe = vec![0, steps];
        if let Some(s) = &self.sstm {
            probe.extend([s.k0.saturating_sub(1), s.k0, s.k0 + 1].into_iter().filter(|&k| k <= steps));
        }
        for k in probe {
            let l = self.lambda_at(k);
            if !(l > 0.0) || !l.is_finite() {
                return param(format!("clipping level at step {k} is {l}"));
            }
            let nu = self.nu_at(k);
            if !(0.0..=1.0).contains(&nu) {
                return param(format!("shift stepsize at step {k} is {nu}, outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Solves `B = max{2, c/ln²B}`. `c = ∞` (σ = 0) gives [`B_MAX`].
///
/// Plain fixed-point iteration oscillates when the root is below `e²`, so the
/// root of `B ln²B = c` is found by Newton's method from the right, where the
/// function is increasing and convex and the iterates decrease monotonically.
pub fn solve_bk(c: f64) -> Result<f64> {
    if c.is_nan() || c < 0.0 {
        return param(format!("B_K coefficient must be nonnegative, got {c}"));
    }
    if !c.is_finite() {
        return Ok(B_MAX);
    }
    let ln2 = std::f64::consts::LN_2;
    if c <= 2.0 * ln2 * ln2 {
        return Ok(2.0);
    }
    let mut b = (c / (ln2 * ln2)).min(B_MAX);
    for _ in 0..200 {
        let lb = b.ln();
        let h = b * lb * lb - c;
        let dh = lb * lb + 2.0 * lb;
        let next = (b - h / dh).max(2.0);
        if (next - b).abs() <= 1e-10 * b {
            return Ok(next.min(B_MAX));
        }
        b = next;
    }
    Err(Error::Numerical(format!("B_K iteration did not converge for c = {c}")))
}

/// Runs `γ(V)` and `V(γ) = r² + coef·γ²·A²·ζ²/n` to a joint fixed point
/// (relative change 1e-8), or uses the explicit `V` if supplied.
fn v_fixed_point<F>(inputs: &TheoryInputs, coef: f64, log_a: f64, mut gamma_of: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if let Some(v) = inputs.v {
        return Ok((v, gamma_of(v)?));
    }
    let r2 = inputs.r * inputs.r;
    let shift = coef * log_a * log_a * inputs.zeta_star * inputs.zeta_star / inputs.nf();
    let mut v = r2;
    for _ in 0..200 {
        let g = gamma_of(v)?;
        let nv = r2 + shift * g * g;
        if (nv - v).abs() <= 1e-8 * nv {
            return Ok((nv, gamma_of(nv)?));
        }
        v = nv;
    }
    Err(Error::Numerical("V fixed point did not converge".into()))
}

fn log48(i: &TheoryInputs) -> f64 {
    (48.0 * i.nf() * (i.kf() + 1.0) / i.beta).ln()
}

fn ab_exp(alpha: f64) -> f64 {
    2.0 * (alpha - 1.0) / alpha
}

fn finish(
    mut s: Schedule,
    theorem: Theorem,
    inputs: &TheoryInputs,
    v: f64,
    log_a: f64,
    v_coef: f64,
    b_k: Option<f64>,
    branches: Vec<Branch>,
) -> Result<Schedule> {
    s.theorem = Some(theorem);
    s.constants = Some(inputs.constants);
    s.horizon = Some(inputs.k);
    s.v = Some(v);
    s.log_factor = Some(log_a);
    s.v_shift_coef = Some(v_coef);
    s.b_k = b_k;
    s.gamma_branches = branches;
    s.validate(inputs.k)?;
    Ok(s)
}

/// Clipped SGD with the exact optimal shift (single node, quasi-strongly convex).
pub fn schedule_star(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let c = inputs.constants;
    let mu = inputs.need_mu("star schedule")?;
    let ell = match inputs.ell {
        Some(e) => e,
        None => 2.0 * inputs.need_l()?,
    };
    let a = (4.0 * (inputs.kf() + 1.0) / inputs.beta).ln();
    let al = inputs.alpha;
    let r = inputs.v.map(f64::sqrt).unwrap_or(inputs.r);
    let cb = div_or_inf(
        (inputs.kf() + 1.0).powf((2.0 * al - 1.0) / al) * mu * mu * r * r,
        c.k(4.0) * c.k(10f64.powf(1.0 / al)) * c.k(120f64.powf(ab_exp(al))) * inputs.sigma.powi(2) * a.powf(ab_exp(al)),
    );
    let bk = solve_bk(cb)?;
    let branches = vec![
        branch("ell", 1.0 / (c.k(400.0) * ell * a)),
        branch("b_k", bk.ln() / (mu * (inputs.kf() + 1.0))),
    ];
    let gamma = min_branch(&branches);
    let lambda = LambdaRule::ExpDecay { scale: r / (c.k(120.0) * gamma * a), rate: gamma * mu, divisor: 2.0 };
    let s = Schedule::bare(gamma, NuRule::Constant { value: 0.0 }, lambda);
    finish(s, Theorem::Star, inputs, r * r, a, 0.0, Some(bk), branches)
}

fn qsm_h2(inputs: &TheoryInputs, ell: f64, theorem: Theorem) -> Result<Schedule> {
    let c = inputs.constants;
    let mu = inputs.need_mu("quasi-strongly monotone schedule")?;
    let a = log48(inputs);
    let al = inputs.alpha;
    let n = inputs.nf();
    let k1 = inputs.kf() + 1.0;
    let v_coef = c.k(9e6);
    let mut last = (Vec::new(), 0.0);
    let gamma_of = |v: f64, last: &mut (Vec<Branch>, f64)| -> Result<f64> {
        let cb = div_or_inf(
            c.k((2f64.sqrt() / 3456.0).powf(2.0 / al)) * k1.powf(ab_exp(al)) * mu * mu * v * n.powf(ab_exp(al)),
            inputs.sigma.powi(2) * a.powf(ab_exp(al)),
        );
        let bk = solve_bk(cb)?;
        let branches = vec![
            branch("ell", 1.0 / (c.k(4096.0) * ell * a)),
            branch("zeta", div_or_inf(n.sqrt() * inputs.r, c.k(3000.0) * inputs.zeta_star * a)),
            branch("b_k", bk.ln() / (mu * k1)),
        ];
        let g = min_branch(&branches);
        *last = (branches, bk);
        Ok(g)
    };
    let (v, gamma) = v_fixed_point(inputs, v_coef, a, |v| gamma_of(v, &mut last))?;
    let (branches, bk) = last;
    let lambda = LambdaRule::ExpDecay {
        scale: n * v.sqrt() / (c.k(256.0 * 2f64.sqrt()) * gamma * a),
        rate: gamma * mu,
        divisor: 2.0,
    };
    let s = Schedule::bare(gamma, NuRule::Constant { value: gamma * mu }, lambda);
    finish(s, theorem, inputs, v, a, v_coef, Some(bk), branches)
}

/// Distributed clipped SGD with shifts, quasi-strongly convex case. Without an
/// explicit `ell` the reduction `ℓ = 2L` is used.
pub fn schedule_sgd_shift_qsc(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let ell = match inputs.ell {
        Some(e) => e,
        None => 2.0 * inputs.need_l()?,
    };
    qsm_h2(inputs, ell, Theorem::SgdShiftQsc)
}

/// Distributed clipped SGDA with shifts, quasi-strongly monotone case.
pub fn schedule_sgda_qsm(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let ell = inputs.ell.ok_or_else(|| Error::Parameter("SGDA schedules need ell".into()))?;
    qsm_h2(inputs, ell, Theorem::SgdaQsm)
}

/// Distributed clipped SGD with shifts, convex case (ν = 0, zero shifts).
pub fn schedule_sgd_shift_convex(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let c = inputs.constants;
    let l = inputs.need_l()?;
    let a = log48(inputs);
    let al = inputs.alpha;
    let n = inputs.nf();
    let v_coef = c.k(36864.0);
    let mut branches = Vec::new();
    let (v, gamma) = v_fixed_point(inputs, v_coef, a, |v| {
        branches = vec![
            branch("smooth", 1.0 / (c.k(360.0) * l * a)),
            branch("zeta", div_or_inf(inputs.r * n.sqrt(), c.k(192.0) * a * inputs.zeta_star)),
            branch(
                "noise",
                div_or_inf(
                    v.sqrt() * n.powf((al - 1.0) / al),
                    c.k(27f64.powf(1.0 / al)) * c.k(48.0) * inputs.sigma * inputs.kf().powf(1.0 / al) * a.powf((al - 1.0) / al),
                ),
            ),
        ];
        Ok(min_branch(&branches))
    })?;
    let lambda = LambdaRule::Constant { value: n * v.sqrt() / (c.k(48.0) * gamma * a) };
    let s = Schedule::bare(gamma, NuRule::Constant { value: 0.0 }, lambda);
    finish(s, Theorem::SgdShiftConvex, inputs, v, a, v_coef, None, branches)
}

/// Distributed clipped SGDA with shifts, monotone case (ν = 0).
pub fn schedule_sgda_monotone(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let c = inputs.constants;
    let ell = inputs.ell.ok_or_else(|| Error::Parameter("SGDA schedules need ell".into()))?;
    let a = log48(inputs);
    let al = inputs.alpha;
    let n = inputs.nf();
    let v_coef = c.k(25600.0);
    let mut branches = Vec::new();
    let (v, gamma) = v_fixed_point(inputs, v_coef, a, |v| {
        branches = vec![
            branch("ell", 1.0 / (c.k(480.0) * ell * a)),
            branch(
                "noise",
                div_or_inf(
                    v.sqrt() * n.powf((al - 1.0) / al),
                    c.k(86400f64.powf(1.0 / al)) * (inputs.kf() + 1.0).powf(1.0 / al) * inputs.sigma * a.powf((al - 1.0) / al),
                ),
            ),
        ];
        Ok(min_branch(&branches))
    })?;
    let lambda = LambdaRule::Constant { value: n * v.sqrt() / (c.k(40.0) * gamma * a) };
    let s = Schedule::bare(gamma, NuRule::Constant { value: 0.0 }, lambda);
    finish(s, Theorem::SgdaMonotone, inputs, v, a, v_coef, None, branches)
}

/// Distributed clipped SEG with shifts, monotone case (ν = 0).
pub fn schedule_seg_monotone(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let c = inputs.constants;
    let l = inputs.need_l()?;
    let a = log48(inputs);
    let al = inputs.alpha;
    let n = inputs.nf();
    let v_coef = c.k(409600.0);
    let mut branches = Vec::new();
    let (v, gamma) = v_fixed_point(inputs, v_coef, a, |v| {
        branches = vec![
            branch("lipschitz", 1.0 / (c.k(1920.0) * l * a)),
            branch(
                "noise",
                div_or_inf(
                    c.k(60f64.powf((2.0 - al) / al)) * v.sqrt() * n.powf((al - 1.0) / al),
                    c.k(97200f64.powf(1.0 / al)) * (inputs.kf() + 1.0).powf(1.0 / al) * inputs.sigma * a.powf((al - 1.0) / al),
                ),
            ),
        ];
        Ok(min_branch(&branches))
    })?;
    let lambda = LambdaRule::Constant { value: n * v.sqrt() / (c.k(60.0) * gamma * a) };
    let s = Schedule::bare(gamma, NuRule::Constant { value: 0.0 }, lambda);
    finish(s, Theorem::SegMonotone, inputs, v, a, v_coef, None, branches)
}

/// Distributed clipped SEG with shifts, quasi-strongly monotone case.
pub fn schedule_seg_qsm(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    let c = inputs.constants;
    let l = inputs.need_l()?;
    let mu = inputs.need_mu("SEG quasi-strongly monotone schedule")?;
    let a = log48(inputs);
    let al = inputs.alpha;
    let n = inputs.nf();
    let k1 = inputs.kf() + 1.0;
    let v_coef = c.k(36e6);
    let mut last = (Vec::new(), 0.0);
    let (v, gamma) = v_fixed_point(inputs, v_coef, a, |v| {
        let cb = div_or_inf(
            n.powf(ab_exp(al)) * k1.powf(ab_exp(al)) * mu * mu * v,
            c.k(3110400f64.powf(2.0 / al)) * inputs.sigma.powi(2) * a.powf(ab_exp(al)),
        );
        let bk = solve_bk(cb)?;
        let branches = vec![
            branch("mu", 1.0 / (c.k(72e6) * mu * a * a)),
            branch("lipschitz", 1.0 / (c.k(6.0) * l)),
            branch("lipschitz_log", n.sqrt() / (c.k(15000.0) * l * a)),
            branch("b_k", c.k(2.0) * bk.ln() / (mu * k1)),
        ];
        let g = min_branch(&branches);
        last = (branches, bk);
        Ok(g)
    })?;
    let (branches, bk) = last;
    let lambda = LambdaRule::ExpDecay { scale: n * v.sqrt() / (c.k(300.0) * gamma * a), rate: gamma * mu, divisor: 4.0 };
    let s = Schedule::bare(gamma, NuRule::Constant { value: gamma * mu }, lambda);
    finish(s, Theorem::SegQsm, inputs, v, a, v_coef, Some(bk), branches)
}

/// SSTM parameters for horizon `k` and distance bound `m`:
/// `(log, C, K₀, a, a-branches, λ numerator)`.
struct SstmParts {
    log: f64,
    c: f64,
    k0: usize,
    a: f64,
    a_branches: Vec<Branch>,
    numerator: f64,
}

fn sstm_parts(inputs: &TheoryInputs, k: usize, m: f64) -> Result<SstmParts> {
    let cs = inputs.constants;
    let l = inputs.need_l()?;
    let n = inputs.nf();
    let kf = k as f64;
    let al = inputs.alpha;
    let log = (10.0 * n * kf / inputs.beta).ln();
    let c = cs.k(864.0) / n * log;
    let k0 = (cs.k(1.5) * c * c * n).ceil() as usize;
    let a_branches = vec![
        branch("floor", 2.0),
        branch("log", cs.k(8.0 * 3f64.powi(5) * 72f64.powi(4)) / n * log.powi(4)),
        branch(
            "noise",
            cs.k(18.0 * 6f64.powi(5)) * inputs.sigma * kf.powf(1.0 / al) * (kf + 1.0) * log.powf((al - 1.0) / al)
                / (m.sqrt() * l * n.powf((al - 1.0) / al)),
        ),
        branch("lemma", cs.k(7.0 / 6.0) * c * c),
    ];
    let a = a_branches.iter().map(|b| b.value).fold(0.0, f64::max);
    let numerator = n * m.sqrt() / (cs.k(72.0) * log);
    Ok(SstmParts { log, c, k0, a, a_branches, numerator })
}

fn sstm_schedule_from(inputs: &TheoryInputs, k: usize, m: f64, p: SstmParts) -> Schedule {
    let coef = SstmCoefficients { a: p.a, l: inputs.l, c: p.c, k0: p.k0, n: inputs.n };
    let mut s = Schedule::bare(coef.alpha(1), NuRule::Sstm, LambdaRule::Sstm { numerator: p.numerator });
    s.sstm = Some(coef);
    s.theorem = Some(Theorem::Sstm);
    s.constants = Some(inputs.constants);
    s.horizon = Some(k);
    s.v = Some(m);
    s.log_factor = Some(p.log);
    s.gamma_branches = p.a_branches;
    if k < p.k0 {
        s.flags.push(format!("horizon K = {k} is below K0 = {}", p.k0));
    }
    s
}

/// Distributed clipped similar-triangles method with shifts (convex case).
/// `gamma_branches` lists the lower bounds on `a`.
pub fn schedule_sstm(inputs: &TheoryInputs) -> Result<Schedule> {
    inputs.validate()?;
    inputs.need_l()?;
    let k = inputs.k;
    let e2 = inputs.shift_err().powi(2);
    let r2 = inputs.r * inputs.r;
    let m = match inputs.v {
        Some(m) => m,
        None => {
            let mut m = r2;
            let mut done = false;
            for _ in 0..200 {
                let p = sstm_parts(inputs, k, m)?;
                let coef = SstmCoefficients { a: p.a, l: inputs.l, c: p.c, k0: p.k0, n: inputs.n };
                let nm = r2 + p.c * p.c * coef.alpha(p.k0 + 1).powi(2) * e2;
                if (nm - m).abs() <= 1e-8 * nm {
                    m = nm;
                    done = true;
                    break;
                }
                m = nm;
            }
            if !done {
                return Err(Error::Numerical("M fixed point did not converge".into()));
            }
            m
        }
    };
    let p = sstm_parts(inputs, k, m)?;
    let s = sstm_schedule_from(inputs, k, m, p);
    s.validate(k)?;
    Ok(s)
}

/// The four displayed lower bounds on a restart stage length.
pub fn restart_stage_branches(inputs: &TheoryInputs, m_prev: f64, eps_t: f64, tau: usize) -> Vec<Branch> {
    let cs = inputs.constants;
    let l = inputs.l;
    let n = inputs.nf();
    let al = inputs.alpha;
    let tf = tau as f64;
    let beta = inputs.beta;
    let p = al / (al - 1.0);
    let b1 = (cs.k(24.0) * l * m_prev / eps_t).sqrt();
    let b2 = cs.k(2e15)
        * (l * m_prev / (n * eps_t)).sqrt()
        * (2e16 * n * (l * m_prev).sqrt() * tf / (eps_t.sqrt() * beta)).ln();
    let (b3, b4) = if inputs.sigma == 0.0 {
        (0.0, 0.0)
    } else {
        let s3 = (cs.k(6f64.powi(8)) * inputs.sigma * m_prev.sqrt() / eps_t).powf(p);
        let b3 = s3 / n * (10.0 * tf / beta * s3).ln();
        let s4 = (cs.k(16e24) * inputs.sigma * m_prev.sqrt() / eps_t).powf(p);
        let b4 = n.powf(-(5.0 * al - 1.0) / (al - 1.0)) * s4 * (10.0 * tf / beta * s4).ln().powf((7.0 * al - 1.0) / (al - 1.0));
        (b3, b4)
    };
    vec![branch("smooth", b1), branch("log", b2), branch("noise", b3), branch("noise_high", b4)]
}

/// Restarted SSTM for quasi-strongly convex problems. Each stage `t` runs
/// `K_t` steps from the previous output with shifts reset to the exact
/// gradients. `K_t` is the ceiling of the four displayed branches, raised if
/// needed so that the stage's own guarantee `6a_tLM_{t−1}/(K(K+3)) ≤ ε_t`
/// holds (this matters only for the unit constant style).
pub fn schedule_restarted_sstm(inputs: &TheoryInputs, epsilon_target: f64) -> Result<Schedule> {
    inputs.validate()?;
    let l = inputs.need_l()?;
    let mu = inputs.need_mu("restarted SSTM")?;
    if !(epsilon_target > 0.0) {
        return param("epsilon target must be positive");
    }
    let r2 = inputs.r * inputs.r;
    let e2 = inputs.shift_err.map(|e| e * e).unwrap_or(l * l * r2);
    // M from the first stage's constants; iterate since K_1 depends on M.
    let m = match inputs.v {
        Some(m) => m,
        None => {
            let mut m = r2;
            for _ in 0..200 {
                let tau = tau_for(mu, m, epsilon_target).max(1);
                let (k1, _) = stage_length(inputs, m, mu * m / 4.0, tau, m / 2.0)?;
                let p = sstm_parts(inputs, k1, m / 2.0)?;
                let coef = SstmCoefficients { a: p.a, l, c: p.c, k0: p.k0, n: inputs.n };
                let nm = r2 + p.c * p.c * coef.alpha(p.k0 + 1).powi(2) * e2;
                if (nm - m).abs() <= 1e-8 * nm {
                    m = nm;
                    break;
                }
                m = nm;
            }
            m
        }
    };
    let tau = tau_for(mu, m, epsilon_target);
    let mut s = Schedule::bare(f64::NAN, NuRule::Sstm, LambdaRule::Sstm { numerator: 0.0 });
    let mut stages = Vec::new();
    if tau == 0 {
        s.flags.push(format!("epsilon {epsilon_target} ≥ μM/2 = {}: no restart needed", mu * m / 2.0));
    }
    for t in 1..=tau {
        let m_prev = m / 2f64.powi(t as i32 - 1);
        let m_t = m / 2f64.powi(t as i32);
        let eps_t = mu * m_prev / 4.0;
        let (k_t, branches) = stage_length(inputs, m_prev, eps_t, tau, m_t)?;
        let p = sstm_parts(inputs, k_t, m_t)?;
        let mut stage_inputs = inputs.clone();
        stage_inputs.k = k_t;
        let mut sched = sstm_schedule_from(&stage_inputs, k_t, m_t, p);
        sched.theorem = Some(Theorem::RestartedSstm);
        sched.validate(k_t)?;
        stages.push(RestartStage { t, m_prev, m_t, epsilon_t: eps_t, k_t, k_t_branches: branches, schedule: sched });
    }
    let total_steps = stages.iter().map(|st| st.k_t).sum();
    if let Some(first) = stages.first() {
        s.gamma = first.schedule.gamma;
        s.sstm = first.schedule.sstm;
        s.lambda = first.schedule.lambda.clone();
    } else {
        s.gamma = 1.0 / l;
        s.lambda = LambdaRule::Constant { value: f64::MAX };
        s.nu = NuRule::Constant { value: 0.0 };
    }
    s.theorem = Some(Theorem::RestartedSstm);
    s.constants = Some(inputs.constants);
    s.horizon = Some(total_steps);
    s.v = Some(m);
    s.restart = Some(RestartPlan { tau, epsilon_target, m, stages, total_steps });
    Ok(s)
}

fn tau_for(mu: f64, m: f64, eps: f64) -> usize {
    let ratio = mu * m / (2.0 * eps);
    if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as usize
    }
}

fn stage_length(inputs: &TheoryInputs, m_prev: f64, eps_t: f64, tau: usize, m_t: f64) -> Result<(usize, Vec<Branch>)> {
    let mut branches = restart_stage_branches(inputs, m_prev, eps_t, tau);
    let base = branches.iter().map(|b| b.value).fold(1.0, f64::max).ceil();
    if !base.is_finite() || base > 1e18 {
        return Ok((base.min(1e18) as usize, branches));
    }
    let mut k = base as usize;
    let mut guarantee = 0.0;
    for _ in 0..200 {
        let p = sstm_parts(inputs, k, m_t)?;
        let target = 6.0 * p.a * inputs.l * m_prev / eps_t;
        // Smallest K with K(K+3) ≥ target.
        let g = ((-3.0 + (9.0 + 4.0 * target).sqrt()) / 2.0).ceil().max(1.0);
        guarantee = g;
        let nk = (base.max(g)) as usize;
        if nk == k {
            break;
        }
        k = nk;
    }
    branches.push(branch("guarantee", guarantee));
    Ok((k, branches))
}

/// Dispatches on the theorem id.
pub fn schedule_for(theorem: Theorem, inputs: &TheoryInputs, epsilon_target: Option<f64>) -> Result<Schedule> {
    match theorem {
        Theorem::Star => schedule_star(inputs),
        Theorem::SgdShiftQsc => schedule_sgd_shift_qsc(inputs),
        Theorem::SgdShiftConvex => schedule_sgd_shift_convex(inputs),
        Theorem::Sstm => schedule_sstm(inputs),
        Theorem::RestartedSstm => {
            let eps = epsilon_target.ok_or_else(|| Error::Parameter("restarted SSTM needs epsilon_target".into()))?;
            schedule_restarted_sstm(inputs, eps)
        }
        Theorem::SgdaMonotone => schedule_sgda_monotone(inputs),
        Theorem::SgdaQsm => schedule_sgda_qsm(inputs),
        Theorem::SegMonotone => schedule_seg_monotone(inputs),
        Theorem::SegQsm => schedule_seg_qsm(inputs),
    }
}
