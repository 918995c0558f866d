use clipshift::linalg::{dist_sq, dot, norm, sub};
use clipshift::noise::{derive_stream, NoiseSpec};
use clipshift::operators::*;
use clipshift::problems::ProblemConfig;
use proptest::prelude::*;

fn vecs(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, dim)
}

fn spec_strategy(dim: usize) -> impl Strategy<Value = ProxSpec> {
    prop_oneof![
        Just(ProxSpec::Zero),
        (vecs(dim), 0.1f64..5.0).prop_map(|(center, radius)| ProxSpec::IndicatorBall { center, radius }),
        (0.0f64..3.0).prop_map(|weight| ProxSpec::L1 { weight }),
        (0.0f64..3.0).prop_map(|weight| ProxSpec::SquaredL2 { weight }),
    ]
}

proptest! {
    #[test]
    fn clip_norm_is_bounded(x in vecs(6), lambda in 1e-3f64..100.0) {
        let y = clip(&x, lambda).unwrap();
        prop_assert!(norm(&y) <= lambda * (1.0 + 1e-15));
    }

    #[test]
    fn clip_is_identity_exactly_inside(x in vecs(6), lambda in 1e-3f64..200.0) {
        let y = clip(&x, lambda).unwrap();
        prop_assert_eq!(y == x, norm(&x) <= lambda);
    }

    #[test]
    fn clip_is_positively_homogeneous(x in vecs(5), lambda in 0.01f64..50.0, c in 0.01f64..100.0) {
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let lhs = clip(&cx, c * lambda).unwrap();
        let rhs: Vec<f64> = clip(&x, lambda).unwrap().iter().map(|v| c * v).collect();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE);
        }
    }

    #[test]
    fn clipped_samples_stay_within_two_lambda_of_their_mean(
        xs in prop::collection::vec(vecs(3), 1..30),
        lambda in 0.01f64..20.0,
    ) {
        let clipped: Vec<Vec<f64>> = xs.iter().map(|x| clip(x, lambda).unwrap()).collect();
        let mut mean = vec![0.0; 3];
        for c in &clipped {
            for (m, v) in mean.iter_mut().zip(c) {
                *m += v / clipped.len() as f64;
            }
        }
        for c in &clipped {
            prop_assert!(norm(&sub(c, &mean)) <= 2.0 * lambda * (1.0 + 1e-12));
        }
    }

    #[test]
    fn prox_is_nonexpansive(spec in spec_strategy(4), x in vecs(4), y in vecs(4), gamma in 0.01f64..5.0) {
        let px = spec.prox(&x, gamma).unwrap();
        let py = spec.prox(&y, gamma).unwrap();
        prop_assert!(dist_sq(&px, &py).sqrt() <= dist_sq(&x, &y).sqrt() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn prox_inequality(spec in spec_strategy(4), x in vecs(4), y in vecs(4), gamma in 0.01f64..5.0) {
        let y = match &spec {
            ProxSpec::IndicatorBall { .. } => spec.prox(&y, 1.0).unwrap(),
            _ => y,
        };
        let p = spec.prox(&x, gamma).unwrap();
        let lhs = dot(&sub(&p, &x), &sub(&y, &p));
        let rhs = gamma * (spec.value(&p) - spec.value(&y));
        let scale = 1.0 + dot(&x, &x) + dot(&y, &y);
        prop_assert!(lhs - rhs >= -1e-10 * scale, "{} < {}", lhs, rhs);
    }

    #[test]
    fn ball_prox_lands_in_the_ball(center in vecs(3), radius in 0.1f64..5.0, x in vecs(3)) {
        let spec = ProxSpec::IndicatorBall { center, radius };
        prop_assert!(spec.contains(&spec.prox(&x, 1.0).unwrap()));
    }
}

#[test]
fn prox_property_suite_passes() {
    for check in check_prox_properties(5, 10_000, &derive_stream(0, 0, 0, 0, 0)) {
        assert!(check.pass, "{check:?}");
    }
}

fn fixed_point_residual(cfg: ProblemConfig, gamma: f64) -> f64 {
    let p = cfg.build().unwrap();
    let p = p.as_min().unwrap();
    let xs = p.x_star.clone().unwrap();
    let g = p.mean_grad(&xs);
    let stepped: Vec<f64> = xs.iter().zip(&g).map(|(x, gi)| x - gamma * gi).collect();
    let out = p.psi.prox(&stepped, gamma).unwrap();
    dist_sq(&out, &xs).sqrt() / norm(&xs).max(1e-300)
}

#[test]
fn prox_gradient_fixed_point_on_presets() {
    for gamma in [1e-3, 0.1, 0.5, 1.0] {
        let ball = ProblemConfig::BallQuadratic { dim: 10, n: 1, center_value: 3.0, radius: 1.0, noise: NoiseSpec::none() };
        assert!(fixed_point_residual(ball, gamma) <= 1e-12);
        let l1 = ProblemConfig::DistributedQuadratic {
            dim: 8,
            n: 3,
            spread: 1.0,
            center: 0.6,
            eig_min: 0.1,
            eig_max: 1.0,
            noise: NoiseSpec::none(),
            psi: ProxSpec::L1 { weight: 0.3 },
        };
        assert!(fixed_point_residual(l1, gamma) <= 1e-12);
    }
}

#[test]
fn gaussian_bound_example() {
    // d = 10, unit scale, λ = 4, σ² = 10.
    let mean = vec![0.0; 10];
    let r = verify_clip_moment_bounds(&mean, &NoiseSpec::gaussian(1.0), 4.0, Some(10f64.sqrt()), 2.0, 100_000, 1, &derive_stream(4, 0, 0, 0, 0))
        .unwrap();
    assert!((r.bias_bound - 10.0).abs() < 1e-12);
    assert!((r.variance_bound - 180.0).abs() < 1e-12);
    assert!(r.pass);
    for rep in &r.repetitions {
        assert!(rep.bias < 0.1 * r.bias_bound && rep.variance < 0.1 * r.variance_bound, "{rep:?}");
    }
}

#[test]
fn worker_averaging_quarters_the_variance() {
    let stream = derive_stream(5, 0, 0, 0, 0);
    let mean = vec![1.0, 0.0, 0.0];
    let one = verify_clip_moment_bounds(&mean, &NoiseSpec::gaussian(1.0), 4.0, Some(1.0), 2.0, 100_000, 1, &stream).unwrap();
    let four = verify_clip_moment_bounds(&mean, &NoiseSpec::gaussian(1.0), 4.0, Some(1.0), 2.0, 100_000, 4, &stream).unwrap();
    let avg = |r: &BoundReport| r.repetitions.iter().map(|x| x.variance).sum::<f64>() / r.repetitions.len() as f64;
    let ratio = avg(&four) / avg(&one);
    assert!((ratio - 0.25).abs() <= 0.05, "{ratio}");
}
