use clipshift::linalg::{dist_sq, dot, norm_sq, sub};
use clipshift::noise::{derive_stream, NoiseSpec};
use clipshift::operators::ProxSpec;
use clipshift::problems::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ball(dim: usize) -> CompositeProblem {
    let cfg = ProblemConfig::BallQuadratic { dim, n: 1, center_value: 3.0, radius: 1.0, noise: NoiseSpec::none() };
    cfg.build().unwrap().as_min().unwrap().clone()
}

fn affine(mu: f64, skew: f64) -> VIProblem {
    let cfg = ProblemConfig::StronglyMonotoneAffineVi {
        dim: 2,
        n: 3,
        mu,
        skew,
        spread: 0.5,
        center: 1.0,
        noise: NoiseSpec::none(),
        psi: ProxSpec::Zero,
    };
    cfg.build().unwrap().as_vi().unwrap().clone()
}

fn skew2() -> VIProblem {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    VIProblem::new(a, vec![vec![0.0, 0.0]], NoiseSpec::none(), ProxSpec::Zero).unwrap()
}

#[test]
fn ball_quadratic_gradients() {
    let p = ball(4);
    assert_eq!(p.full_grad(0, &[0.0; 4]).unwrap(), vec![0.0; 4]);
    let x = [0.3, -1.0, 2.0, 5.0];
    assert_eq!(p.stoch_grad(0, &x, &derive_stream(0, 0, 0, 0, 0)).unwrap(), x.to_vec());
    assert!(p.full_grad(1, &x).is_err());
}

#[test]
fn two_worker_gradients_cancel() {
    let p = CompositeProblem::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]], NoiseSpec::none(), ProxSpec::Zero).unwrap();
    assert_eq!(p.full_grad(0, &[0.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
    assert_eq!(p.full_grad(1, &[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    assert_eq!(p.mean_grad(&[0.0, 0.0]), vec![0.0, 0.0]);
}

#[test]
fn skew_operator_examples() {
    let p = skew2();
    assert_eq!(p.operator_value(0, &[1.0, 0.0], None).unwrap(), vec![0.0, -1.0]);
    let xs = p.x_star.clone().unwrap();
    assert_eq!(p.operator_value(0, &xs, None).unwrap(), vec![0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let d = sub(&p.mean_operator(&x), &p.mean_operator(&y));
        assert_eq!(dot(&d, &sub(&x, &y)), 0.0);
    }
}

#[test]
fn objective_gap_examples() {
    let p = ball(10);
    let xs = p.x_star.clone().unwrap();
    assert_eq!(p.objective_gap(&xs).unwrap().value, 0.0);
    let x0: Vec<f64> = (0..10).map(|_| 3.0 + 1.0 / 10f64.sqrt()).collect();
    let g = p.objective_gap(&x0).unwrap();
    let want = 0.5 * norm_sq(&x0) - 0.5 * norm_sq(&xs);
    assert!((g.value - want).abs() <= 1e-12 * want, "{} vs {want}", g.value);
    assert!(g.feasible);
    let outside: Vec<f64> = vec![0.0; 10];
    assert!(!p.objective_gap(&outside).unwrap().feasible);

    let d = ProblemConfig::DistributedQuadratic {
        dim: 5,
        n: 3,
        spread: 2.0,
        center: 1.0,
        eig_min: 1.0,
        eig_max: 1.0,
        noise: NoiseSpec::none(),
        psi: ProxSpec::Zero,
    }
    .build()
    .unwrap();
    let d = d.as_min().unwrap();
    let u = [0.1, -0.2, 0.3, 0.0, 0.5];
    let x: Vec<f64> = d.b_mean().iter().zip(&u).map(|(b, ui)| b + ui).collect();
    let gap = d.objective_gap(&x).unwrap().value;
    assert!((gap - 0.5 * norm_sq(&u)).abs() <= 1e-12);
}

fn grid_gap(p: &VIProblem, x: &[f64], radius: f64) -> f64 {
    // Brute force over a polar grid of the disk around x*.
    let xs = p.x_star.clone().unwrap();
    let mut best = f64::NEG_INFINITY;
    for ri in 0..=200 {
        let r = radius * ri as f64 / 200.0;
        for ti in 0..2000 {
            let t = 2.0 * std::f64::consts::PI * ti as f64 / 2000.0;
            let y = [xs[0] + r * t.cos(), xs[1] + r * t.sin()];
            best = best.max(dot(&p.mean_operator(&y), &sub(x, &y)));
        }
    }
    best
}

#[test]
fn restricted_gap_examples() {
    let p = skew2();
    assert_eq!(p.restricted_gap(&[0.0, 0.0], 1.0).unwrap(), 0.0);
    let g = p.restricted_gap(&[1.0, 0.0], 1.0).unwrap();
    assert!((g - 1.0).abs() <= 1e-12);
    assert!((grid_gap(&p, &[1.0, 0.0], 1.0) - 1.0).abs() <= 1e-5);

    // Not skew: the ascent path agrees with brute force.
    let q = affine(1.0, 1.0);
    let x = [1.7, 0.2];
    let got = q.restricted_gap(&x, 1.5).unwrap();
    let grid = grid_gap(&q, &x, 1.5);
    assert!(got >= grid - 1e-9 && got - grid <= 1e-3, "{got} vs grid {grid}");
}

#[test]
fn restricted_gap_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [skew2(), affine(0.5, 2.0)] {
        let xs = p.x_star.clone().unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = xs.iter().map(|v| v + rng.gen_range(-3.0..3.0)).collect();
            assert!(p.restricted_gap(&x, 2.0).unwrap() >= -1e-10);
        }
    }
}

#[test]
fn gaussian_noise_is_unbiased() {
    let cfg = ProblemConfig::DistributedQuadratic {
        dim: 3,
        n: 2,
        spread: 1.0,
        center: 1.0,
        eig_min: 0.5,
        eig_max: 2.0,
        noise: NoiseSpec::gaussian(2.0),
        psi: ProxSpec::Zero,
    };
    let p = cfg.build().unwrap();
    let p = p.as_min().unwrap();
    let x = [0.4, -0.1, 2.0];
    let exact = p.full_grad(1, &x).unwrap();
    let n = 100_000;
    let mut sum = vec![0.0; 3];
    let mut sq = vec![0.0; 3];
    for s in 0..n {
        let g = p.stoch_grad(1, &x, &derive_stream(8, 0, 1, s as u64, 0)).unwrap();
        for j in 0..3 {
            let e = g[j] - exact[j];
            sum[j] += e;
            sq[j] += e * e;
        }
    }
    for j in 0..3 {
        let m = sum[j] / n as f64;
        let sd = (sq[j] / n as f64 - m * m).sqrt();
        assert!(m.abs() <= 3.0 * sd / (n as f64).sqrt(), "coordinate {j}: {m}");
    }
}

#[test]
fn smoothness_certificate() {
    let cfg = ProblemConfig::DistributedQuadratic {
        dim: 6,
        n: 3,
        spread: 1.0,
        center: 1.0,
        eig_min: 1e-3,
        eig_max: 4.0,
        noise: NoiseSpec::none(),
        psi: ProxSpec::Zero,
    };
    let p = cfg.build().unwrap();
    let p = p.as_min().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..6).map(|_| rng.gen_range(-10.0..10.0)).collect();
        for i in 0..3 {
            let d = dist_sq(&p.full_grad(i, &x).unwrap(), &p.full_grad(i, &y).unwrap()).sqrt();
            assert!(d <= p.l * dist_sq(&x, &y).sqrt() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn affine_monotonicity_certificates() {
    let (mu, skew) = (0.7, 1.3);
    let p = affine(mu, skew);
    let xs = p.x_star.clone().unwrap();
    let ell = p.ell.unwrap();
    // ‖S‖ = skew, so ℓ = (μ² + skew²)/μ.
    assert!((ell - (mu * mu + skew * skew) / mu).abs() <= 1e-10 * ell);
    let fs = p.mean_operator(&xs);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let x: Vec<f64> = xs.iter().map(|v| v + rng.gen_range(-4.0..4.0)).collect();
        let df = sub(&p.mean_operator(&x), &fs);
        let dx = sub(&x, &xs);
        let inner = dot(&df, &dx);
        assert!((inner - mu * norm_sq(&dx)).abs() <= 1e-12 * (1.0 + norm_sq(&dx)));
        assert!(norm_sq(&df) <= ell * inner * (1.0 + 1e-12) + 1e-14);
    }
}

#[test]
fn composite_vi_solution_satisfies_the_fixed_point() {
    let cfg = ProblemConfig::StronglyMonotoneAffineVi {
        dim: 4,
        n: 2,
        mu: 1.0,
        skew: 0.5,
        spread: 1.0,
        center: 1.0,
        noise: NoiseSpec::none(),
        psi: ProxSpec::L1 { weight: 0.4 },
    };
    let p = cfg.build().unwrap();
    let p = p.as_vi().unwrap();
    let xs = p.x_star.clone().unwrap();
    for gamma in [0.01, 0.3] {
        let f = p.mean_operator(&xs);
        let step: Vec<f64> = xs.iter().zip(&f).map(|(x, g)| x - gamma * g).collect();
        let out = p.psi.prox(&step, gamma).unwrap();
        assert!(dist_sq(&out, &xs).sqrt() <= 1e-12 * (1.0 + norm_sq(&xs).sqrt()));
    }
}
