use onebit::covariance::*;
use onebit::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `∫_0^a √(1−s²) ds`.
fn half_disc(a: f64) -> f64 {
    0.5 * (a * (1.0 - a * a).max(0.0).sqrt() + a.asin())
}

// For T = 3 and γ = 1, (q12, q13) fixed leaves q23 in an interval of length
// 2√((1−q12²)(1−q13²)) centered at q12·q13, so a cell
// [a0,a1]×[b0,b1]×{one side of the center} has volume
// (F(a1)−F(a0))(F(b1)−F(b0)) with F = half_disc. Q_γ = γ·Q_1.
#[test]
fn uniform_sampler_passes_chi_square_on_exact_cells() {
    for gamma in [1.0, 0.8] {
        let bins = 6;
        let edges: Vec<f64> = (0..=bins).map(|k| -1.0 + 2.0 * k as f64 / bins as f64).collect();
        let mass: Vec<f64> = edges.windows(2).map(|w| half_disc(w[1]) - half_disc(w[0])).collect();
        let total = std::f64::consts::PI.powi(2) / 2.0;
        let n = 100_000;
        let qs = sample_uniform_q_batch(3, gamma, n, 41).unwrap();
        let mut counts = vec![0u64; bins * bins * 2];
        let bin = |v: f64| (((v / gamma + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        for q in &qs {
            let e = q.entries();
            let side = usize::from(e[2] / gamma > (e[0] / gamma) * (e[1] / gamma));
            counts[(bin(e[0]) * bins + bin(e[1])) * 2 + side] += 1;
        }
        let mut chi2 = 0.0;
        for i in 0..bins {
            for j in 0..bins {
                let expected = n as f64 * mass[i] * mass[j] / total;
                assert!(expected > 5.0);
                for side in 0..2 {
                    let o = counts[(i * bins + j) * 2 + side] as f64;
                    chi2 += (o - expected).powi(2) / expected;
                }
            }
        }
        let dof = (bins * bins * 2 - 1) as f64;
        let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
        assert!(p > 0.001, "gamma {gamma}: chi2 {chi2} p {p}");
    }
}

#[test]
fn second_moment_matches_rejection_and_closed_form() {
    let gamma = 0.7;
    let n = 200_000;
    let qs = sample_uniform_q_batch(3, gamma, n, 5).unwrap();
    let m_sampler = qs.iter().map(|q| q.entries()[0].powi(2)).sum::<f64>() / n as f64;

    let mut r = stream_rng(99, 0);
    let (mut acc, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    while acc < n {
        let e: Vec<f64> = (0..3).map(|_| gamma * (2.0 * r.random::<f64>() - 1.0)).collect();
        let q = CorrelationVector::new(3, e.clone()).unwrap();
        if is_member_eigen(&q, gamma) {
            acc += 1;
            sum += e[0] * e[0];
            sum_sq += e[0].powi(4);
        }
    }
    let m_rej = sum / n as f64;
    let sd = ((sum_sq / n as f64 - m_rej * m_rej) / n as f64).sqrt();
    assert!((m_sampler - m_rej).abs() < 4.0 * sd * 2f64.sqrt(), "{m_sampler} vs {m_rej}");
    // density of q12/γ is ∝ √(1−s²), whose second moment is 1/4
    assert!((m_sampler - gamma * gamma / 4.0).abs() < 4.0 * sd);
}

#[test]
fn round_trip_through_input_matrix() {
    let mut worst: f64 = 0.0;
    for (t, gamma) in [(3, 0.8), (4, 0.5), (5, 0.95)] {
        let snr = gamma / (1.0 - gamma);
        for q in sample_uniform_q_batch(t, gamma, 334, t as u64).unwrap() {
            let x = input_from_q(&q, snr).unwrap();
            assert!(x.is_normalized_triangular(snr, 1e-9));
            let back = rho_of_x(&x).unwrap();
            for (a, b) in q.entries().iter().zip(back.entries()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn exact_volumes_at_small_t() {
    use std::f64::consts::PI;
    assert!((vol_q_exact(2, 1.0).unwrap() - 2.0).abs() < 1e-12);
    assert!((vol_q_exact(3, 1.0).unwrap() / (PI * PI / 2.0) - 1.0).abs() < 1e-10);
    assert!((vol_q_exact(4, 1.0).unwrap() / (32.0 * PI * PI / 27.0) - 1.0).abs() < 1e-10);
    // Q_γ = γ Q_1 scales the volume by γ^m
    let r = vol_q_exact(4, 0.6).unwrap() / vol_q_exact(4, 1.0).unwrap();
    assert!((r / 0.6f64.powi(6) - 1.0).abs() < 1e-12);
}

#[test]
fn log_volume_expansions_at_large_t() {
    let exact = log2_vol_q_exact(60, 1.0).unwrap();
    let fine = log_vol_q_asymptotic(60, VolumePrecision::Fine);
    let coarse = log_vol_q_asymptotic(60, VolumePrecision::Coarse);
    assert!((fine - exact).abs() < 0.05);
    assert!((fine - exact).abs() < (coarse - exact).abs());
}

#[test]
fn monte_carlo_volume_brackets_closed_form() {
    for (t, gamma) in [(3, 0.8), (4, 1.0)] {
        let e = vol_q_mc(t, gamma, 200_000, 17).unwrap();
        let exact = vol_q_exact(t, gamma).unwrap();
        assert!((e.value - exact).abs() < 4.0 * e.std_err, "T={t}: {} ± {} vs {exact}", e.value, e.std_err);
    }
}

proptest! {
    #[test]
    fn membership_tests_agree(t in 2usize..6, gamma in 0.05f64..1.0, seed in any::<u64>()) {
        let mut r = stream_rng(seed, 0);
        let m = pair_count(t);
        let e: Vec<f64> = (0..m).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
        let q = CorrelationVector::new(t, e).unwrap();
        let margin = sigma_of_q(&q).min_eigenvalue() - (1.0 - gamma);
        prop_assume!(margin.abs() > 1e-8);
        prop_assert_eq!(is_member_eigen(&q, gamma), is_member_cholesky(&q, gamma));
    }

    #[test]
    fn sampled_points_are_members(t in 2usize..7, gamma in 0.05f64..1.0, seed in any::<u64>()) {
        let q = sample_uniform_q(t, gamma, seed).unwrap();
        prop_assert!(is_member(&q, gamma));
        prop_assert!(q.max_abs() <= gamma + 1e-12);
    }

    #[test]
    fn pair_index_is_a_bijection(t in 2usize..40) {
        let p = pairs(t);
        prop_assert_eq!(p.len(), pair_count(t));
        for (k, (i, j)) in p.into_iter().enumerate() {
            prop_assert_eq!(pair_index(t, i, j), k);
        }
    }
}
