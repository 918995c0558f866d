//! Distributed problem instances: diagonal quadratics for composite
//! minimization and affine operators for variational inequalities.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{dist_sq, dot, norm, norm_sq, sub};
use crate::noise::{fill_noise, NoiseSpec, RandomStream};
use crate::operators::ProxSpec;

/// `f_i(x) = ½ Σ_j q_j (x_j − b_ij)²` with curvature `q` shared by all workers.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub n: usize,
    pub dim: usize,
    pub q: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub noise: NoiseSpec,
    pub psi: ProxSpec,
    pub l: f64,
    pub mu: f64,
    pub x_star: Option<Vec<f64>>,
    pub phi_star: Option<f64>,
    pub zeta_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    pub value: f64,
    /// False when `x` lies outside dom Ψ; `value` then omits the indicator.
    pub feasible: bool,
}

fn check_worker(worker: usize, n: usize) -> Result<()> {
    if worker >= n {
        Err(Error::WorkerIndex { index: worker, n })
    } else {
        Ok(())
    }
}

impl CompositeProblem {
    pub fn new(q: Vec<f64>, b: Vec<Vec<f64>>, noise: NoiseSpec, psi: ProxSpec) -> Result<Self> {
        let dim = q.len();
        let n = b.len();
        if dim == 0 || n == 0 {
            return param("problem needs dim ≥ 1 and n ≥ 1");
        }
        if b.iter().any(|bi| bi.len() != dim) {
            return param("worker offsets must match the curvature length");
        }
        if q.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return param("curvatures must be positive and finite");
        }
        noise.validate()?;
        psi.validate(dim)?;
        let l = q.iter().cloned().fold(0.0, f64::max);
        let mu = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut p = Self { n, dim, q, b, noise, psi, l, mu, x_star: None, phi_star: None, zeta_star: None };
        p.x_star = p.solve_x_star();
        if let Some(xs) = p.x_star.clone() {
            p.phi_star = Some(p.f_value(&xs) + p.psi.value(&xs));
            let s: f64 = (0..n).map(|i| norm_sq(&p.grad_unchecked(i, &xs))).sum();
            p.zeta_star = Some((s / n as f64).sqrt());
        }
        Ok(p)
    }

    pub fn b_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for bi in &self.b {
            for (mj, bj) in m.iter_mut().zip(bi) {
                *mj += bj;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Closed-form minimizer of `½ Σ q_j (x_j − b̄_j)² + Ψ(x)` where available.
    fn solve_x_star(&self) -> Option<Vec<f64>> {
        let bm = self.b_mean();
        match &self.psi {
            ProxSpec::Zero => Some(bm),
            ProxSpec::L1 { weight } => Some(
                bm.iter()
                    .zip(&self.q)
                    .map(|(&v, &qj)| {
                        let t = weight / qj;
                        if v.abs() <= t {
                            0.0
                        } else {
                            v - t * v.signum()
                        }
                    })
                    .collect(),
            ),
            ProxSpec::SquaredL2 { weight } => {
                Some(bm.iter().zip(&self.q).map(|(&v, &qj)| qj * v / (qj + weight)).collect())
            }
            ProxSpec::IndicatorBall { .. } => {
                let uniform = self.q.iter().all(|&v| v == self.q[0]);
                uniform.then(|| self.psi.prox(&bm, 1.0).expect("positive step"))
            }
        }
    }

    fn grad_unchecked(&self, worker: usize, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.b[worker])
            .zip(&self.q)
            .map(|((xj, bj), qj)| qj * (xj - bj))
            .collect()
    }

    pub fn full_grad(&self, worker: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_worker(worker, self.n)?;
        Ok(self.grad_unchecked(worker, x))
    }

    /// Writes `∇f_i(x) + ξ` into `out`.
    pub(crate) fn stoch_grad_into(&self, worker: usize, x: &[f64], stream: &RandomStream, out: &mut [f64]) {
        if self.noise.is_silent() {
            out.iter_mut().for_each(|v| *v = 0.0);
        } else {
            fill_noise(&self.noise, &mut stream.rng(), out);
        }
        let bi = &self.b[worker];
        for j in 0..self.dim {
            out[j] += self.q[j] * (x[j] - bi[j]);
        }
    }

    pub fn stoch_grad(&self, worker: usize, x: &[f64], stream: &RandomStream) -> Result<Vec<f64>> {
        check_worker(worker, self.n)?;
        let mut out = vec![0.0; self.dim];
        self.stoch_grad_into(worker, x, stream, &mut out);
        Ok(out)
    }

    pub fn mean_grad(&self, x: &[f64]) -> Vec<f64> {
        let bm = self.b_mean();
        x.iter().zip(&bm).zip(&self.q).map(|((xj, bj), qj)| qj * (xj - bj)).collect()
    }

    /// `f(x) = (1/n) Σ f_i(x)`.
    pub fn f_value(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .b
            .iter()
            .map(|bi| {
                0.5 * x.iter().zip(bi).zip(&self.q).map(|((xj, bj), qj)| qj * (xj - bj) * (xj - bj)).sum::<f64>()
            })
            .sum();
        s / self.n as f64
    }

    pub fn grads_at_x_star(&self) -> Option<Vec<Vec<f64>>> {
        let xs = self.x_star.as_ref()?;
        Some((0..self.n).map(|i| self.grad_unchecked(i, xs)).collect())
    }

    /// `Φ(x) − Φ*`, computed from the expansion around `x*` so that small gaps
    /// do not cancel against Φ*.
    pub fn objective_gap(&self, x: &[f64]) -> Result<GapValue> {
        let xs = self
            .x_star
            .as_ref()
            .ok_or_else(|| Error::Unsupported("objective gap needs a known minimizer".into()))?;
        let e = sub(x, xs);
        let g = self.mean_grad(xs);
        let quad: f64 = 0.5 * e.iter().zip(&self.q).map(|(ej, qj)| qj * ej * ej).sum::<f64>();
        let feasible = self.psi.contains(x);
        let dpsi = match &self.psi {
            ProxSpec::IndicatorBall { .. } => 0.0,
            other => other.value(x) - other.value(xs),
        };
        Ok(GapValue { value: dot(&g, &e) + quad + dpsi, feasible })
    }

    /// Squared distance to `x*`.
    pub fn sq_dist(&self, x: &[f64]) -> Result<f64> {
        let xs = self
            .x_star
            .as_ref()
            .ok_or_else(|| Error::Unsupported("squared distance needs a known minimizer".into()))?;
        Ok(dist_sq(x, xs))
    }
}

/// `F_i(x) = A x + b_i` with a shared matrix `A`.
#[derive(Debug, Clone)]
pub struct VIProblem {
    pub n: usize,
    pub dim: usize,
    /// Row-major copy of A.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub noise: NoiseSpec,
    pub psi: ProxSpec,
    pub l: f64,
    pub mu: f64,
    /// Star-cocoercivity constant; `None` when sym(A) is singular.
    pub ell: Option<f64>,
    pub x_star: Option<Vec<f64>>,
    sym_min: f64,
    sym_norm: f64,
}

impl VIProblem {
    pub fn new(a: DMatrix<f64>, b: Vec<Vec<f64>>, noise: NoiseSpec, psi: ProxSpec) -> Result<Self> {
        let dim = a.nrows();
        let n = b.len();
        if a.ncols() != dim || dim == 0 || n == 0 {
            return param("operator matrix must be square and n ≥ 1");
        }
        if b.iter().any(|bi| bi.len() != dim) {
            return param("worker offsets must match the matrix size");
        }
        noise.validate()?;
        psi.validate(dim)?;
        let sym = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let sym_min = eig.eigenvalues.min();
        let sym_norm = eig.eigenvalues.amax();
        let l = a.clone().svd(false, false).singular_values.max();
        let scale = l.max(1.0);
        if sym_min < -1e-12 * scale {
            return Err(Error::Precondition(format!(
                "operator is not monotone: smallest eigenvalue of sym(A) is {sym_min}"
            )));
        }
        let mu = sym_min.max(0.0);
        let ell = if sym_min > 1e-12 * scale {
            // max_e ‖Ae‖² / ⟨Ae, e⟩ = λ_max(M^{-1/2} AᵀA M^{-1/2}), M = sym(A).
            let inv_sqrt = &eig.eigenvectors
                * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
                * eig.eigenvectors.transpose();
            let ata = a.transpose() * &a;
            let m = &inv_sqrt * ata * &inv_sqrt;
            let m = (&m + m.transpose()) * 0.5;
            Some(SymmetricEigen::new(m).eigenvalues.max())
        } else {
            None
        };
        let rows: Vec<Vec<f64>> = (0..dim).map(|i| a.row(i).iter().cloned().collect()).collect();
        let mut p = Self { n, dim, a: rows, b, noise, psi, l, mu, ell, x_star: None, sym_min, sym_norm };
        p.x_star = p.solve_x_star(&a)?;
        Ok(p)
    }

    pub fn b_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for bi in &self.b {
            for (mj, bj) in m.iter_mut().zip(bi) {
                *mj += bj;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }

    fn solve_x_star(&self, a: &DMatrix<f64>) -> Result<Option<Vec<f64>>> {
        let bm = self.b_mean();
        if self.psi.is_zero() {
            let rhs = nalgebra::DVector::from_vec(bm.iter().map(|v| -v).collect());
            return Ok(a.clone().lu().solve(&rhs).map(|v| v.iter().cloned().collect()));
        }
        if self.mu <= 0.0 {
            return Ok(None);
        }
        // Forward-backward iteration contracts with factor sqrt(1 − μ²/L²).
        let gamma = self.mu / (self.l * self.l);
        let mut x = vec![0.0; self.dim];
        for _ in 0..1_000_000 {
            let mut f = self.apply_a(&x);
            for (fj, bj) in f.iter_mut().zip(&bm) {
                *fj += bj;
            }
            let mut nx: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi - gamma * fi).collect();
            self.psi.prox_in_place(&mut nx, gamma);
            let moved = dist_sq(&nx, &x).sqrt();
            x = nx;
            if moved <= 1e-15 * (1.0 + norm(&x)) {
                return Ok(Some(x));
            }
        }
        Err(Error::Numerical("solution of the composite VI did not converge".into()))
    }

    fn operator_unchecked(&self, worker: usize, x: &[f64]) -> Vec<f64> {
        let bi = &self.b[worker];
        self.a.iter().zip(bi).map(|(row, bj)| dot(row, x) + bj).collect()
    }

    pub(crate) fn operator_into(&self, worker: usize, x: &[f64], stream: Option<&RandomStream>, out: &mut [f64]) {
        match stream {
            Some(s) if !self.noise.is_silent() => fill_noise(&self.noise, &mut s.rng(), out),
            _ => out.iter_mut().for_each(|v| *v = 0.0),
        }
        let bi = &self.b[worker];
        for (j, row) in self.a.iter().enumerate() {
            out[j] += dot(row, x) + bi[j];
        }
    }

    /// `F_i(x)`, plus noise when a stream is supplied.
    pub fn operator_value(&self, worker: usize, x: &[f64], stream: Option<&RandomStream>) -> Result<Vec<f64>> {
        check_worker(worker, self.n)?;
        let mut out = vec![0.0; self.dim];
        self.operator_into(worker, x, stream, &mut out);
        Ok(out)
    }

    /// `F(x) = (1/n) Σ F_i(x)` without noise.
    pub fn mean_operator(&self, x: &[f64]) -> Vec<f64> {
        let bm = self.b_mean();
        self.apply_a(x).iter().zip(&bm).map(|(a, b)| a + b).collect()
    }

    pub fn operators_at_x_star(&self) -> Option<Vec<Vec<f64>>> {
        let xs = self.x_star.as_ref()?;
        Some((0..self.n).map(|i| self.operator_unchecked(i, xs)).collect())
    }

    pub fn zeta_star(&self) -> Option<f64> {
        let f = self.operators_at_x_star()?;
        Some((f.iter().map(|v| norm_sq(v)).sum::<f64>() / self.n as f64).sqrt())
    }

    pub fn sq_dist(&self, x: &[f64]) -> Result<f64> {
        let xs = self
            .x_star
            .as_ref()
            .ok_or_else(|| Error::Unsupported("squared distance needs a known solution".into()))?;
        Ok(dist_sq(x, xs))
    }

    fn is_skew(&self) -> bool {
        self.sym_norm <= 1e-14 * self.l.max(1.0)
    }

    /// `max_{‖y − x*‖ ≤ radius} ⟨F(y), x − y⟩ + Ψ(x) − Ψ(y)`.
    pub fn restricted_gap(&self, x: &[f64], radius: f64) -> Result<f64> {
        let xs = self
            .x_star
            .as_ref()
            .ok_or_else(|| Error::Unsupported("restricted gap needs a known solution".into()))?;
        if !(radius > 0.0) {
            return param(format!("gap radius must be positive, got {radius}"));
        }
        let bm = self.b_mean();
        let psi_x = self.psi.value(x);
        if self.is_skew() && self.psi.is_zero() {
            let g: Vec<f64> = self.mean_operator(x).iter().map(|v| -v).collect();
            return Ok(dot(xs, &g) + radius * norm(&g) + dot(&bm, x));
        }
        let w = match &self.psi {
            ProxSpec::Zero => 0.0,
            ProxSpec::SquaredL2 { weight } => *weight,
            ProxSpec::L1 { weight } if *weight == 0.0 => 0.0,
            _ => {
                return Err(Error::Unsupported(
                    "restricted gap with a nonsmooth composite term is only available in closed form".into(),
                ))
            }
        };
        // Projected gradient ascent on the concave inner objective.
        let at_x: Vec<f64> = (0..self.dim).map(|j| self.a.iter().zip(x).map(|(row, xi)| row[j] * xi).sum()).collect();
        let lip = 2.0 * self.sym_norm + w;
        if lip == 0.0 {
            return Ok(0.0);
        }
        let t = 1.0 / lip;
        let mut y = xs.clone();
        let project = |y: &mut Vec<f64>| {
            let d = dist_sq(y, xs).sqrt();
            if d > radius {
                let c = radius / d;
                for (yi, xi) in y.iter_mut().zip(xs) {
                    *yi = xi + c * (*yi - xi);
                }
            }
        };
        let mut converged = false;
        for _ in 0..100_000 {
            let ay = self.apply_a(&y);
            let at_y: Vec<f64> =
                (0..self.dim).map(|j| self.a.iter().zip(&y).map(|(row, yi)| row[j] * yi).sum()).collect();
            let mut ny: Vec<f64> = (0..self.dim)
                .map(|j| y[j] + t * (at_x[j] - at_y[j] - ay[j] - bm[j] - w * y[j]))
                .collect();
            project(&mut ny);
            let moved = dist_sq(&ny, &y).sqrt();
            y = ny;
            if moved <= 1e-8 * t {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical("restricted gap ascent hit the iteration cap".into()));
        }
        let fy = self.mean_operator(&y);
        Ok(dot(&fy, &sub(x, &y)) + psi_x - self.psi.value(&y))
    }

    /// Smallest eigenvalue of the symmetric part of A.
    pub fn sym_min_eigenvalue(&self) -> f64 {
        self.sym_min
    }
}

fn default_dim() -> usize {
    10
}
fn default_one() -> usize {
    1
}
fn default_center_value() -> f64 {
    3.0
}
fn default_radius() -> f64 {
    1.0
}
fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}

/// Problem presets as they appear in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `f = ½‖x‖²` on every worker over the ball `B_r(x̂)`, `x̂ = (c, …, c)`.
    BallQuadratic {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_one")]
        n: usize,
        #[serde(default = "default_center_value")]
        center_value: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default)]
        noise: NoiseSpec,
    },
    /// `f_i = ½ Σ q_j (x_j − b_ij)²`, `b_i = center·e + spread·(i − (n+1)/2)·u`,
    /// `u = e/√d`, curvatures log-spaced from `eig_max` down to `eig_min`.
    DistributedQuadratic {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_one")]
        n: usize,
        #[serde(default = "one")]
        spread: f64,
        #[serde(default = "one")]
        center: f64,
        #[serde(default = "one")]
        eig_min: f64,
        #[serde(default = "one")]
        eig_max: f64,
        #[serde(default)]
        noise: NoiseSpec,
        #[serde(default)]
        psi: ProxSpec,
    },
    /// `A = scale·J` with `J` block-diagonal 2×2 rotations; `b_i` spread around 0.
    SkewBilinearVi {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "default_one")]
        n: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        spread: f64,
        #[serde(default)]
        noise: NoiseSpec,
    },
    /// `A = μI + skew·J`, `b̄ = −A·(center·e)`, worker offsets spread around b̄.
    StronglyMonotoneAffineVi {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "default_one")]
        n: usize,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "one")]
        skew: f64,
        #[serde(default)]
        spread: f64,
        #[serde(default = "one")]
        center: f64,
        #[serde(default)]
        noise: NoiseSpec,
        #[serde(default)]
        psi: ProxSpec,
    },
}

#[derive(Debug, Clone)]
pub enum Problem {
    Min(CompositeProblem),
    Vi(VIProblem),
}

fn spread_offsets(n: usize, dim: usize, spread: f64, base: &[f64]) -> Vec<Vec<f64>> {
    let u = 1.0 / (dim as f64).sqrt();
    (0..n)
        .map(|i| {
            let c = spread * ((i + 1) as f64 - (n as f64 + 1.0) / 2.0);
            base.iter().map(|v| v + c * u).collect()
        })
        .collect()
}

fn rotation_blocks(dim: usize, scale: f64) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    let mut i = 0;
    while i + 1 < dim {
        j[(i, i + 1)] = scale;
        j[(i + 1, i)] = -scale;
        i += 2;
    }
    j
}

impl ProblemConfig {
    pub fn n(&self) -> usize {
        match self {
            ProblemConfig::BallQuadratic { n, .. }
            | ProblemConfig::DistributedQuadratic { n, .. }
            | ProblemConfig::SkewBilinearVi { n, .. }
            | ProblemConfig::StronglyMonotoneAffineVi { n, .. } => *n,
        }
    }

    pub fn set_n(&mut self, value: usize) {
        match self {
            ProblemConfig::BallQuadratic { n, .. }
            | ProblemConfig::DistributedQuadratic { n, .. }
            | ProblemConfig::SkewBilinearVi { n, .. }
            | ProblemConfig::StronglyMonotoneAffineVi { n, .. } => *n = value,
        }
    }

    pub fn noise_mut(&mut self) -> &mut NoiseSpec {
        match self {
            ProblemConfig::BallQuadratic { noise, .. }
            | ProblemConfig::DistributedQuadratic { noise, .. }
            | ProblemConfig::SkewBilinearVi { noise, .. }
            | ProblemConfig::StronglyMonotoneAffineVi { noise, .. } => noise,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        match self.clone() {
            ProblemConfig::BallQuadratic { dim, n, center_value, radius, noise } => {
                let center = vec![center_value; dim];
                let psi = ProxSpec::IndicatorBall { center, radius };
                Ok(Problem::Min(CompositeProblem::new(vec![1.0; dim], vec![vec![0.0; dim]; n], noise, psi)?))
            }
            ProblemConfig::DistributedQuadratic { dim, n, spread, center, eig_min, eig_max, noise, psi } => {
                if !(eig_min > 0.0 && eig_max >= eig_min) {
                    return param("need 0 < eig_min ≤ eig_max");
                }
                let q: Vec<f64> = (0..dim)
                    .map(|j| {
                        if dim == 1 {
                            eig_max
                        } else {
                            eig_max * (eig_min / eig_max).powf(j as f64 / (dim - 1) as f64)
                        }
                    })
                    .collect();
                let b = spread_offsets(n, dim, spread, &vec![center; dim]);
                Ok(Problem::Min(CompositeProblem::new(q, b, noise, psi)?))
            }
            ProblemConfig::SkewBilinearVi { dim, n, scale, spread, noise } => {
                if dim % 2 != 0 {
                    return param("skew_bilinear_vi needs an even dimension");
                }
                let a = rotation_blocks(dim, scale);
                let b = spread_offsets(n, dim, spread, &vec![0.0; dim]);
                Ok(Problem::Vi(VIProblem::new(a, b, noise, ProxSpec::Zero)?))
            }
            ProblemConfig::StronglyMonotoneAffineVi { dim, n, mu, skew, spread, center, noise, psi } => {
                if !(mu > 0.0) {
                    return param("strongly_monotone_affine_vi needs mu > 0");
                }
                let a = DMatrix::identity(dim, dim) * mu + rotation_blocks(dim, skew);
                let xc = nalgebra::DVector::from_element(dim, center);
                let bm: Vec<f64> = (&a * xc).iter().map(|v| -v).collect();
                let b = spread_offsets(n, dim, spread, &bm);
                Ok(Problem::Vi(VIProblem::new(a, b, noise, psi)?))
            }
        }
    }
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Min(p) => p.n,
            Problem::Vi(p) => p.n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Min(p) => p.dim,
            Problem::Vi(p) => p.dim,
        }
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        match self {
            Problem::Min(p) => p.x_star.as_deref(),
            Problem::Vi(p) => p.x_star.as_deref(),
        }
    }

    pub fn noise(&self) -> &NoiseSpec {
        match self {
            Problem::Min(p) => &p.noise,
            Problem::Vi(p) => &p.noise,
        }
    }

    pub fn psi(&self) -> &ProxSpec {
        match self {
            Problem::Min(p) => &p.psi,
            Problem::Vi(p) => &p.psi,
        }
    }

    /// The starting point used when a solver config gives none: for a ball
    /// constraint `x̂ + r·e/‖e‖`, otherwise `x* + e/√d`.
    pub fn default_x0(&self) -> Result<Vec<f64>> {
        if let ProxSpec::IndicatorBall { center, radius } = self.psi() {
            let u = radius / (self.dim() as f64).sqrt();
            return Ok(center.iter().map(|c| c + u).collect());
        }
        let xs = self
            .x_star()
            .ok_or_else(|| Error::Config("no default x0 without a known solution; set x0".into()))?;
        let u = 1.0 / (self.dim() as f64).sqrt();
        Ok(xs.iter().map(|v| v + u).collect())
    }

    pub fn as_min(&self) -> Result<&CompositeProblem> {
        match self {
            Problem::Min(p) => Ok(p),
            Problem::Vi(_) => Err(Error::Config("method needs a minimization problem".into())),
        }
    }

    pub fn as_vi(&self) -> Result<&VIProblem> {
        match self {
            Problem::Vi(p) => Ok(p),
            Problem::Min(_) => Err(Error::Config("method needs a variational inequality problem".into())),
        }
    }
}

/// Largest observed `‖∇f_i(x) − ∇f_i(y)‖ / ‖x − y‖` over random pairs in a
/// box of half-width `radius` around `center`.
pub fn empirical_smoothness<R: Rng>(
    p: &CompositeProblem,
    center: &[f64],
    radius: f64,
    pairs: usize,
    rng: &mut R,
) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x: Vec<f64> = center.iter().map(|c| c + radius * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        let y: Vec<f64> = center.iter().map(|c| c + radius * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        let den = dist_sq(&x, &y).sqrt();
        if den == 0.0 {
            continue;
        }
        for i in 0..p.n {
            let gx = p.grad_unchecked(i, &x);
            let gy = p.grad_unchecked(i, &y);
            worst = worst.max(dist_sq(&gx, &gy).sqrt() / den);
        }
    }
    worst
}
