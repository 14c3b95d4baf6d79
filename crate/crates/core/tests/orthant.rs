use onebit::covariance::{sample_uniform_q_batch, CorrelationVector};
use onebit::orthant::*;
use onebit::scalar::{eta, eta_prime};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Orthant probabilities from the arcsine law for bivariate signs:
/// `P(y) = 2^{−T} + Σ_{i<j} y_i y_j asin(q_ij)/(2^{T−1} π)` for T ≤ 3.
fn arcsine_pmf(t: usize, q: &[f64]) -> Vec<f64> {
    let scale = match t {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    };
    (0..1usize << t)
        .map(|idx| {
            let y: Vec<f64> = (0..t).map(|k| if idx >> k & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut p = 1.0 / (1 << t) as f64;
            let mut k = 0;
            for i in 0..t {
                for j in i + 1..t {
                    p += y[i] * y[j] * q[k].asin() / scale;
                    k += 1;
                }
            }
            p
        })
        .collect()
}

#[test]
fn exact_pmfs_match_arcsine_law() {
    for q in [-0.9, -0.2, 0.0, 0.5, 0.99] {
        let got = pmf_t2(q).unwrap();
        for (a, b) in got.pmf().iter().zip(arcsine_pmf(2, &[q])) {
            assert!((a - b).abs() < 1e-15);
        }
    }
    for q in sample_uniform_q_batch(3, 0.95, 200, 3).unwrap() {
        let got = pmf_t3(&q).unwrap();
        for (a, b) in got.pmf().iter().zip(arcsine_pmf(3, q.entries())) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn named_points() {
    let p = pmf_t2(0.5).unwrap();
    assert!((p.prob(1) - 1.0 / 6.0).abs() < 1e-15 && (p.prob(2) - 1.0 / 6.0).abs() < 1e-15);
    let one = pmf_t2(1.0).unwrap();
    assert_eq!(one.pmf(), &[0.5, 0.0, 0.0, 0.5]);
    let mu = mu_t3(&CorrelationVector::constant(3, 0.5).unwrap()).unwrap();
    for k in 1..4 {
        assert!((mu.values()[k] - 1.0 / 6.0).abs() < 1e-15);
    }
    assert!((mu.values()[0] - 0.5).abs() < 1e-15);
}

#[test]
fn monte_carlo_pmfs() {
    let q2 = CorrelationVector::new(2, vec![0.5]).unwrap();
    let mc = pmf_mc(&q2, 1_000_000, 1).unwrap();
    assert!(mc.tv_distance(&pmf_t2(0.5).unwrap()) < 0.003);
    let q3 = sample_uniform_q_batch(3, 0.9, 1, 8).unwrap().remove(0);
    let mc = pmf_mc(&q3, 1_000_000, 2).unwrap();
    assert!(mc.tv_distance(&pmf_t3(&q3).unwrap()) < 0.005);
}

#[test]
fn half_normal_estimator() {
    let z = CorrelationVector::zeros(4).unwrap();
    let e = pmf_half_normal(&z, &[1, -1, 1, 1], 1000, 0).unwrap();
    assert!((e.value - 1.0 / 16.0).abs() < 1e-15);
    let q = CorrelationVector::new(2, vec![0.5]).unwrap();
    let e = pmf_half_normal(&q, &[1, 1], 1_000_000, 4).unwrap();
    let want = pmf_t2(0.5).unwrap().prob(0);
    assert!((e.value - want).abs() < 3.0 * e.std_err, "{} ± {} vs {want}", e.value, e.std_err);
    assert!(e.warning.is_none());
    let hot = CorrelationVector::new(2, vec![0.95]).unwrap();
    assert!(pmf_half_normal(&hot, &[1, 1], 1000, 4).unwrap().warning.is_some());
}

#[test]
fn fisher_in_q_matches_chain_rule_for_two_uses() {
    // K = #disagreements is Binomial(1, η(q)) per antenna
    for q in [0.0, 0.4, -0.7] {
        let mu = eta(q).unwrap();
        let want = eta_prime(q).unwrap().powi(2) / (mu * (1.0 - mu));
        let got = fisher_q_numeric(&CorrelationVector::new(2, vec![q]).unwrap(), None).unwrap();
        assert!((got.matrix[(0, 0)] / want - 1.0).abs() < 1e-6, "q={q}");
        assert!(!got.step_too_large);
    }
    let z = fisher_q_numeric(&CorrelationVector::zeros(2).unwrap(), None).unwrap();
    assert!((z.matrix[(0, 0)] - 4.0 / (PI * PI)).abs() < 1e-8);
}

#[test]
fn fisher_in_mu() {
    let uniform = MuVector::new(vec![0.25; 4]).unwrap();
    assert!((fisher_det_mu(&uniform).unwrap() - 256.0).abs() < 1e-9);
    let half = MuVector::new(vec![0.5, 0.5]).unwrap();
    assert!((fisher_det_mu(&half).unwrap() - 4.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn pmf_t3_is_a_symmetric_distribution(seed in any::<u64>(), gamma in 0.01f64..0.999) {
        let q = onebit::covariance::sample_uniform_q(3, gamma, seed).unwrap();
        let f = pmf_t3(&q).unwrap();
        prop_assert!((f.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for idx in 0..8 {
            prop_assert!(f.prob(idx) >= 0.0);
            prop_assert!((f.prob(idx) - f.prob(7 - idx)).abs() < 1e-15);
        }
        let m = f.marginalize_last();
        let p2 = pmf_t2(q.entries()[0]).unwrap();
        for (a, b) in m.pmf().iter().zip(p2.pmf()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
        let back = mu_from_pmf_t3(&f).unwrap();
        let mu = mu_t3(&q).unwrap();
        for (a, b) in back.values().iter().zip(mu.values()) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
