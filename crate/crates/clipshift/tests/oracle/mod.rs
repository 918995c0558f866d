//! Hand transcription of the schedule formulas, checked against the
//! calculators to 1e-10 relative. The oracle solves `B_K` by bisection and runs
//! its own `V`/`M` fixed points, so it shares no code with the library.

use clipshift::params::*;

const TOL: f64 = 1e-10;

fn close(a: f64, b: f64, what: &str) {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    assert!(
        (a - b).abs() <= TOL * scale || (a.is_infinite() && b.is_infinite()),
        "{what}: library {a:e} vs oracle {b:e}"
    );
}

/// Numeric factor in the chosen constant style.
fn k(unit: bool, c: f64) -> f64 {
    if unit {
        1.0
    } else {
        c
    }
}

/// `B = max{2, c/ln²B}` by bisection on `B ln²B − c` over `[2, 1e30]`.
fn bk_bisect(c: f64) -> f64 {
    if c.is_infinite() {
        return 1e30;
    }
    let f = |b: f64| b * b.ln().powi(2) - c;
    if f(2.0) >= 0.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (2.0f64, 1e30f64);
    for _ in 0..400 {
        let mid = (lo * hi).sqrt().max(lo + (hi - lo) / 2.0 * f64::EPSILON);
        let mid = if hi / lo > 4.0 { mid } else { 0.5 * (lo + hi) };
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn inf_if_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn inputs(l: f64, mu: f64, ell: Option<f64>, sigma: f64, alpha: f64, n: usize, kk: usize, r: f64, v: Option<f64>, zeta: f64, unit: bool) -> TheoryInputs {
    TheoryInputs {
        l,
        mu,
        ell,
        sigma,
        alpha,
        n,
        k: kk,
        beta: 0.1,
        r,
        v,
        zeta_star: zeta,
        shift_err: None,
        constants: if unit { ConstantSet::Unit } else { ConstantSet::Explicit },
    }
}

fn unit(i: &TheoryInputs) -> bool {
    i.constants == ConstantSet::Unit
}

/// Iterates `V = R² + c·γ(V)²·A²·ζ²/n` until it stops moving.
fn fixed_v(i: &TheoryInputs, coef: f64, a: f64, gamma: impl Fn(f64) -> f64) -> f64 {
    if let Some(v) = i.v {
        return v;
    }
    let mut v = i.r * i.r;
    for _ in 0..1000 {
        let nv = i.r * i.r + coef * gamma(v).powi(2) * a * a * i.zeta_star.powi(2) / i.n as f64;
        if (nv - v).abs() <= 1e-14 * nv {
            return nv;
        }
        v = nv;
    }
    v
}

// ---------- prox-clipped SGD with the optimal shift, n = 1 ----------

struct Expect {
    gamma: f64,
    lambda0: f64,
    lambda_k: f64,
    nu: f64,
    v: f64,
}

fn oracle_star(i: &TheoryInputs) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let al = i.alpha;
    let ell = i.ell.unwrap_or(2.0 * i.l);
    let r = i.v.map(f64::sqrt).unwrap_or(i.r);
    let lg = (4.0 * (kk + 1.0) / i.beta).ln();
    let c = inf_if_zero(
        (kk + 1.0).powf((2.0 * al - 1.0) / al) * i.mu * i.mu * r * r,
        k(u, 4.0) * k(u, 10f64.powf(1.0 / al)) * k(u, 120f64.powf(2.0 * (al - 1.0) / al)) * i.sigma * i.sigma
            * lg.powf(2.0 * (al - 1.0) / al),
    );
    let bk = bk_bisect(c);
    let gamma = (1.0 / (k(u, 400.0) * ell * lg)).min(bk.ln() / (i.mu * (kk + 1.0)));
    let lam = |step: f64| (-gamma * i.mu * (1.0 + step / 2.0)).exp() * r / (k(u, 120.0) * gamma * lg);
    Expect { gamma, lambda0: lam(0.0), lambda_k: lam(kk), nu: 0.0, v: r * r }
}

// ---------- quasi-strongly monotone SGDA / qsc SGD-shift ----------

fn oracle_qsm(i: &TheoryInputs, ell: f64) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let n = i.n as f64;
    let al = i.alpha;
    let a = (48.0 * n * (kk + 1.0) / i.beta).ln();
    let e = 2.0 * (al - 1.0) / al;
    let gamma_of = |v: f64| {
        let c = inf_if_zero(
            k(u, (2f64.sqrt() / 3456.0).powf(2.0 / al)) * (kk + 1.0).powf(e) * i.mu * i.mu * v * n.powf(e),
            i.sigma * i.sigma * a.powf(e),
        );
        let bk = bk_bisect(c);
        let b1 = 1.0 / (k(u, 4096.0) * ell * a);
        let b2 = inf_if_zero(n.sqrt() * i.r, k(u, 3000.0) * i.zeta_star * a);
        let b3 = bk.ln() / (i.mu * (kk + 1.0));
        b1.min(b2).min(b3)
    };
    let v = fixed_v(i, k(u, 9e6), a, gamma_of);
    let gamma = gamma_of(v);
    let lam = |step: f64| n * (-gamma * i.mu * (1.0 + step / 2.0)).exp() * v.sqrt() / (k(u, 256.0 * 2f64.sqrt()) * gamma * a);
    Expect { gamma, lambda0: lam(0.0), lambda_k: lam(kk), nu: gamma * i.mu, v }
}

// ---------- convex SGD-shift ----------

fn oracle_convex(i: &TheoryInputs) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let n = i.n as f64;
    let al = i.alpha;
    let a = (48.0 * n * (kk + 1.0) / i.beta).ln();
    let gamma_of = |v: f64| {
        let b1 = 1.0 / (k(u, 360.0) * i.l * a);
        let b2 = inf_if_zero(i.r * n.sqrt(), k(u, 192.0) * a * i.zeta_star);
        let b3 = inf_if_zero(
            v.sqrt() * n.powf((al - 1.0) / al),
            k(u, 27f64.powf(1.0 / al)) * k(u, 48.0) * i.sigma * kk.powf(1.0 / al) * a.powf((al - 1.0) / al),
        );
        b1.min(b2).min(b3)
    };
    let v = fixed_v(i, k(u, 36864.0), a, gamma_of);
    let gamma = gamma_of(v);
    let lam = n * v.sqrt() / (k(u, 48.0) * gamma * a);
    Expect { gamma, lambda0: lam, lambda_k: lam, nu: 0.0, v }
}

// ---------- monotone SGDA ----------

fn oracle_sgda_monotone(i: &TheoryInputs) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let n = i.n as f64;
    let al = i.alpha;
    let ell = i.ell.unwrap();
    let a = (48.0 * n * (kk + 1.0) / i.beta).ln();
    let gamma_of = |v: f64| {
        let b1 = 1.0 / (k(u, 480.0) * ell * a);
        let b2 = inf_if_zero(
            v.sqrt() * n.powf((al - 1.0) / al),
            k(u, 86400f64.powf(1.0 / al)) * (kk + 1.0).powf(1.0 / al) * i.sigma * a.powf((al - 1.0) / al),
        );
        b1.min(b2)
    };
    let v = fixed_v(i, k(u, 25600.0), a, gamma_of);
    let gamma = gamma_of(v);
    let lam = n * v.sqrt() / (k(u, 40.0) * gamma * a);
    Expect { gamma, lambda0: lam, lambda_k: lam, nu: 0.0, v }
}

// ---------- monotone SEG ----------

fn oracle_seg_monotone(i: &TheoryInputs) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let n = i.n as f64;
    let al = i.alpha;
    let a = (48.0 * n * (kk + 1.0) / i.beta).ln();
    let gamma_of = |v: f64| {
        let b1 = 1.0 / (k(u, 1920.0) * i.l * a);
        let b2 = inf_if_zero(
            k(u, 60f64.powf((2.0 - al) / al)) * v.sqrt() * n.powf((al - 1.0) / al),
            k(u, 97200f64.powf(1.0 / al)) * (kk + 1.0).powf(1.0 / al) * i.sigma * a.powf((al - 1.0) / al),
        );
        b1.min(b2)
    };
    let v = fixed_v(i, k(u, 409600.0), a, gamma_of);
    let gamma = gamma_of(v);
    let lam = n * v.sqrt() / (k(u, 60.0) * gamma * a);
    Expect { gamma, lambda0: lam, lambda_k: lam, nu: 0.0, v }
}

// ---------- quasi-strongly monotone SEG ----------

fn oracle_seg_qsm(i: &TheoryInputs) -> Expect {
    let u = unit(i);
    let kk = i.k as f64;
    let n = i.n as f64;
    let al = i.alpha;
    let a = (48.0 * n * (kk + 1.0) / i.beta).ln();
    let e = 2.0 * (al - 1.0) / al;
    let gamma_of = |v: f64| {
        let c = inf_if_zero(
            n.powf(e) * (kk + 1.0).powf(e) * i.mu * i.mu * v,
            k(u, 3110400f64.powf(2.0 / al)) * i.sigma * i.sigma * a.powf(e),
        );
        let bk = bk_bisect(c);
        [
            1.0 / (k(u, 72e6) * i.mu * a * a),
            1.0 / (k(u, 6.0) * i.l),
            n.sqrt() / (k(u, 15000.0) * i.l * a),
            k(u, 2.0) * bk.ln() / (i.mu * (kk + 1.0)),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    };
    let v = fixed_v(i, k(u, 36e6), a, gamma_of);
    let gamma = gamma_of(v);
    let lam = |step: f64| n * (-gamma * i.mu * (1.0 + step / 4.0)).exp() * v.sqrt() / (k(u, 300.0) * gamma * a);
    Expect { gamma, lambda0: lam(0.0), lambda_k: lam(kk), nu: gamma * i.mu, v }
}

fn check(s: &Schedule, e: &Expect, kk: usize, what: &str) {
    close(s.gamma, e.gamma, &format!("{what} gamma"));
    close(s.lambda_at(0), e.lambda0, &format!("{what} lambda_0"));
    close(s.lambda_at(kk), e.lambda_k, &format!("{what} lambda_K"));
    close(s.nu_at(0), e.nu, &format!("{what} nu"));
    close(s.v.unwrap(), e.v, &format!("{what} V"));
}

pub fn star_matches_transcription() {
    for i in [
        inputs(1.0, 0.1, Some(1.0), 1.0, 1.5, 1, 1000, 1.0, None, 0.0, false),
        inputs(2.0, 0.5, None, 0.3, 2.0, 1, 20000, 3.0, None, 0.0, true),
        inputs(1.0, 1.0, Some(4.0), 5.0, 1.2, 1, 500, 0.0, Some(2.0), 0.0, true),
    ] {
        check(&schedule_star(&i).unwrap(), &oracle_star(&i), i.k, "star");
    }
}

pub fn sgd_shift_qsc_matches_transcription() {
    for i in [
        // The example input set: L = ℓ = 1, μ = 0.1, n = 4, K = 10³, V = 1, σ = 1, α = 1.5.
        inputs(1.0, 0.1, Some(1.0), 1.0, 1.5, 4, 1000, 1.0, Some(1.0), 0.0, false),
        inputs(1.0, 1.0, None, 2.0, 1.4, 8, 5000, 3.0, None, 1.0, true),
        inputs(3.0, 0.2, None, 0.0, 2.0, 2, 300, 1.0, None, 0.5, true),
    ] {
        let ell = i.ell.unwrap_or(2.0 * i.l);
        check(&schedule_sgd_shift_qsc(&i).unwrap(), &oracle_qsm(&i, ell), i.k, "sgd_shift_qsc");
    }
}

pub fn sgda_qsm_matches_transcription() {
    for i in [
        inputs(1.0, 0.5, Some(2.0), 1.0, 2.0, 1, 1000, 1.0, None, 0.0, false),
        inputs(1.0, 1.0, Some(2.0), 0.0, 2.0, 3, 1000, 2.0, None, 1.5, true),
        inputs(1.0, 0.1, Some(5.0), 0.7, 1.6, 5, 2500, 1.0, Some(3.0), 1.0, true),
    ] {
        check(&schedule_sgda_qsm(&i).unwrap(), &oracle_qsm(&i, i.ell.unwrap()), i.k, "sgda_qsm");
    }
}

pub fn sgd_shift_convex_matches_transcription() {
    for i in [
        inputs(1.0, 0.0, None, 1.0, 1.5, 4, 1000, 1.0, None, 2.0, false),
        inputs(2.0, 0.0, None, 0.0, 2.0, 1, 100, 3.0, None, 0.0, true),
        inputs(1.0, 0.0, None, 3.0, 1.1, 16, 40000, 1.0, Some(5.0), 1.0, true),
    ] {
        check(&schedule_sgd_shift_convex(&i).unwrap(), &oracle_convex(&i), i.k, "sgd_shift_convex");
    }
}

pub fn sgda_monotone_matches_transcription() {
    for i in [
        inputs(1.0, 0.0, Some(1.0), 1.0, 2.0, 2, 1000, 1.0, None, 1.0, false),
        inputs(1.0, 0.0, Some(3.0), 0.0, 2.0, 1, 50, 2.0, None, 0.0, true),
        inputs(1.0, 0.0, Some(0.5), 2.0, 1.3, 4, 8000, 1.0, Some(9.0), 2.0, true),
    ] {
        check(&schedule_sgda_monotone(&i).unwrap(), &oracle_sgda_monotone(&i), i.k, "sgda_monotone");
    }
}

pub fn seg_monotone_matches_transcription() {
    for i in [
        inputs(1.0, 0.0, None, 1.0, 1.5, 2, 1000, 1.0, None, 1.0, false),
        inputs(2.0, 0.0, None, 0.0, 2.0, 1, 2000, 1.0, None, 0.0, true),
        inputs(0.5, 0.0, None, 4.0, 1.9, 8, 100, 2.0, Some(6.0), 0.0, true),
    ] {
        check(&schedule_seg_monotone(&i).unwrap(), &oracle_seg_monotone(&i), i.k, "seg_monotone");
    }
}

pub fn seg_qsm_matches_transcription() {
    for i in [
        inputs(1.0, 0.5, None, 1.0, 2.0, 2, 1000, 1.0, None, 1.0, false),
        inputs(2.0, 1.0, None, 0.0, 2.0, 1, 3000, 1.0, None, 0.0, true),
        inputs(1.0, 0.05, None, 2.0, 1.5, 4, 700, 3.0, Some(10.0), 0.0, true),
    ] {
        check(&schedule_seg_qsm(&i).unwrap(), &oracle_seg_qsm(&i), i.k, "seg_qsm");
    }
}

// ---------- SSTM ----------

struct SstmExpect {
    c: f64,
    k0: usize,
    a: f64,
    m: f64,
    numerator_scale: f64,
}

fn oracle_sstm_parts(i: &TheoryInputs, kk: usize, m: f64) -> (f64, usize, f64, f64) {
    let u = unit(i);
    let n = i.n as f64;
    let kf = kk as f64;
    let al = i.alpha;
    let lg = (10.0 * n * kf / i.beta).ln();
    let c = k(u, 864.0) / n * lg;
    let k0 = (k(u, 1.5) * c * c * n).ceil() as usize;
    let a = [
        2.0,
        k(u, 8.0 * 243.0 * 72f64.powi(4)) / n * lg.powi(4),
        k(u, 18.0 * 7776.0) * i.sigma * kf.powf(1.0 / al) * (kf + 1.0) * lg.powf((al - 1.0) / al)
            / (m.sqrt() * i.l * n.powf((al - 1.0) / al)),
        // Optimization lemma: a ≥ 7C²/6.
        k(u, 7.0 / 6.0) * c * c,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    (c, k0, a, lg)
}

fn oracle_sstm(i: &TheoryInputs) -> SstmExpect {
    let err = i.shift_err.unwrap_or(i.zeta_star);
    let m = match i.v {
        Some(m) => m,
        None => {
            let mut m = i.r * i.r;
            for _ in 0..1000 {
                let (c, k0, a, _) = oracle_sstm_parts(i, i.k, m);
                let alpha_k0 = (k0 as f64 + 2.0) / (2.0 * a * i.l);
                let nm = i.r * i.r + c * c * alpha_k0 * alpha_k0 * err * err;
                if (nm - m).abs() <= 1e-14 * nm {
                    m = nm;
                    break;
                }
                m = nm;
            }
            m
        }
    };
    let (c, k0, a, lg) = oracle_sstm_parts(i, i.k, m);
    SstmExpect { c, k0, a, m, numerator_scale: i.n as f64 * m.sqrt() / (k(unit(i), 72.0) * lg) }
}

pub fn sstm_matches_transcription() {
    for i in [
        inputs(1.0, 0.0, None, 1.0, 1.5, 4, 1000, 1.0, None, 1.0, false),
        inputs(1.0, 0.0, None, 0.0, 2.0, 1, 800, 3.0, None, 0.0, true),
        inputs(2.0, 0.0, None, 0.5, 1.8, 8, 5000, 1.0, Some(4.0), 0.0, true),
    ] {
        let s = schedule_sstm(&i).unwrap();
        let e = oracle_sstm(&i);
        let co = s.sstm.unwrap();
        close(co.c, e.c, "C");
        assert_eq!(co.k0, e.k0, "K0");
        close(co.a, e.a, "a");
        close(s.v.unwrap(), e.m, "M");
        let alpha = |j: usize| (j as f64 + 1.0) / (2.0 * e.a * i.l);
        close(s.gamma, alpha(1), "alpha_1");
        for step in [0usize, 1, e.k0.saturating_sub(1), e.k0, e.k0 + 1, i.k] {
            let tilde = if step < e.k0 { alpha(e.k0 + 1) } else { alpha(step + 1) };
            close(s.lambda_at(step), e.numerator_scale / tilde, &format!("lambda_{step}"));
            let kf = step as f64;
            let nu = if step < e.k0 {
                (kf + 2.0).powi(2) / (e.c * e.c * (e.k0 as f64 + 2.0).powi(2) * i.n as f64)
            } else {
                (2.0 * kf + 5.0) / (kf + 3.0).powi(2)
            };
            close(s.nu_at(step), nu, &format!("nu_{step}"));
        }
        // A_k by direct summation of α_1..α_k.
        let mut big_a = 0.0;
        for kk in 1..=50 {
            big_a += alpha(kk);
            close(co.big_a(kk), big_a, &format!("A_{kk}"));
        }
    }
}

// ---------- restarts ----------

fn oracle_stage_branches(i: &TheoryInputs, m_prev: f64, eps: f64, tau: usize) -> [f64; 4] {
    let u = unit(i);
    let n = i.n as f64;
    let l = i.l;
    let al = i.alpha;
    let t = tau as f64;
    let b1 = (k(u, 24.0) * l * m_prev / eps).sqrt();
    let b2 = k(u, 2e15) * (l * m_prev / (n * eps)).sqrt() * (2e16 * n * (l * m_prev).sqrt() * t / (eps.sqrt() * i.beta)).ln();
    if i.sigma == 0.0 {
        return [b1, b2, 0.0, 0.0];
    }
    let p = al / (al - 1.0);
    let q3 = (k(u, 6f64.powi(8)) * i.sigma * m_prev.sqrt() / eps).powf(p);
    let b3 = q3 / n * (10.0 * t / i.beta * q3).ln();
    let q4 = (k(u, 16e24) * i.sigma * m_prev.sqrt() / eps).powf(p);
    let b4 = q4 / n.powf((5.0 * al - 1.0) / (al - 1.0)) * (10.0 * t / i.beta * q4).ln().powf((7.0 * al - 1.0) / (al - 1.0));
    [b1, b2, b3, b4]
}

pub fn restart_stages_match_transcription() {
    let cases = [
        (inputs(1.0, 0.5, None, 0.0, 2.0, 1, 1, 1.0, Some(16.0), 0.0, true), 1.0),
        (inputs(4.0, 0.1, None, 0.2, 1.5, 2, 1, 2.0, Some(10.0), 0.0, true), 0.01),
        (inputs(1.0, 1.0, None, 1.0, 2.0, 4, 1, 1.0, Some(8.0), 0.0, false), 0.5),
    ];
    for (i, eps) in cases {
        let s = schedule_restarted_sstm(&i, eps).unwrap();
        let plan = s.restart.as_ref().unwrap();
        let m = i.v.unwrap();
        let tau = (i.mu * m / (2.0 * eps)).log2().ceil() as usize;
        assert_eq!(plan.tau, tau);
        assert_eq!(plan.stages.len(), tau);
        for st in &plan.stages {
            let m_prev = m / 2f64.powi(st.t as i32 - 1);
            close(st.m_prev, m_prev, "M_{t-1}");
            close(st.m_t, m / 2f64.powi(st.t as i32), "M_t");
            close(st.epsilon_t, i.mu * m_prev / 4.0, "eps_t");
            let want = oracle_stage_branches(&i, m_prev, st.epsilon_t, tau);
            for (b, w) in st.k_t_branches.iter().take(4).zip(want) {
                close(b.value, w, &format!("K_t branch {}", b.name));
            }
            let base = want.into_iter().fold(1.0, f64::max).ceil().min(1e18);
            assert!(st.k_t as f64 >= base, "K_t below the displayed branches");
            // Inner schedule is the SSTM schedule for (M_t, K_t).
            let mut inner = i.clone();
            inner.k = st.k_t;
            let (c, k0, a, _) = oracle_sstm_parts(&inner, st.k_t, st.m_t);
            let co = st.schedule.sstm.unwrap();
            close(co.c, c, "stage C");
            assert_eq!(co.k0, k0);
            close(co.a, a, "stage a");
        }
        assert_eq!(plan.total_steps, plan.stages.iter().map(|s| s.k_t).sum::<usize>());
    }
}

pub fn restart_tau_examples() {
    // μM/(2ε) = 8 gives three stages; the last one ends at M/8.
    let i = inputs(1.0, 1.0, None, 0.0, 2.0, 1, 1, 1.0, Some(16.0), 0.0, true);
    let s = schedule_restarted_sstm(&i, 1.0).unwrap();
    let plan = s.restart.unwrap();
    assert_eq!(plan.tau, 3);
    close(plan.stages[2].m_t, 16.0 / 8.0, "M_3");
    // ε ≥ μM/2: nothing to do.
    let s = schedule_restarted_sstm(&i, 8.0).unwrap();
    assert_eq!(s.restart.unwrap().tau, 0);
    assert!(!s.flags.is_empty());
}

// ---------- B_K ----------

pub fn solve_bk_matches_bisection() {
    // The example set: K = 10³, μ = 1, V = 1, n = 1, α = 2, σ = 1, β = 0.1.
    let (kk, al, n) = (1000.0f64, 2.0f64, 1.0f64);
    let a = (48.0 * n * (kk + 1.0) / 0.1f64).ln();
    let e = 2.0 * (al - 1.0) / al;
    let c = (2f64.sqrt() / 3456.0).powf(2.0 / al) * (kk + 1.0).powf(e) * n.powf(e) / a.powf(e);
    for coef in [c, c * 1e6, 0.5, 3.0, 50.0, 1e3, 1e9, 1e20, 1e40] {
        let got = solve_bk(coef).unwrap();
        let want = bk_bisect(coef);
        assert!((got - want).abs() <= 1e-8 * want, "c = {coef}: {got} vs {want}");
        if got > 2.0 && got < B_MAX {
            assert!((got - coef / got.ln().powi(2)).abs() <= 1e-8 * got);
        }
    }
    assert_eq!(solve_bk(f64::INFINITY).unwrap(), B_MAX);
    assert_eq!(solve_bk(0.0).unwrap(), 2.0);
}

/// Every transcription check, by name. Each panics on mismatch.
#[allow(dead_code)]
pub const CHECKS: [(&str, fn()); 11] = [
    ("star_matches_transcription", star_matches_transcription),
    ("sgd_shift_qsc_matches_transcription", sgd_shift_qsc_matches_transcription),
    ("sgda_qsm_matches_transcription", sgda_qsm_matches_transcription),
    ("sgd_shift_convex_matches_transcription", sgd_shift_convex_matches_transcription),
    ("sgda_monotone_matches_transcription", sgda_monotone_matches_transcription),
    ("seg_monotone_matches_transcription", seg_monotone_matches_transcription),
    ("seg_qsm_matches_transcription", seg_qsm_matches_transcription),
    ("sstm_matches_transcription", sstm_matches_transcription),
    ("restart_stages_match_transcription", restart_stages_match_transcription),
    ("restart_tau_examples", restart_tau_examples),
    ("solve_bk_matches_bisection", solve_bk_matches_bisection),
];
