use onebit::coherent::sample_optimal_coherent_inputs;
use onebit::covariance::{input_from_q, sample_uniform_q, sample_uniform_q_batch, vol_q_mc, CorrelationVector};
use onebit::noncoherent::alpha_t3;
use onebit::orthant::{pmf_half_normal, pmf_mc};
use onebit::simulator::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

/// Every Monte Carlo entry point, reduced to a vector of f64 bit patterns.
fn fingerprint() -> Vec<u64> {
    let mut v: Vec<f64> = Vec::new();
    let e = vol_q_mc(4, 0.8, 50_000, 1).unwrap();
    v.extend([e.value, e.std_err]);
    let e = alpha_t3(0.6, 50_000, 2).unwrap();
    v.extend([e.value, e.std_err]);
    let q = CorrelationVector::new(3, vec![0.2, -0.1, 0.4]).unwrap();
    v.extend(pmf_mc(&q, 30_000, 3).unwrap().pmf());
    v.push(pmf_half_normal(&q, &[1, -1, 1], 30_000, 4).unwrap().value);
    for q in sample_uniform_q_batch(5, 0.9, 20_000, 5).unwrap().iter().step_by(997) {
        v.extend(q.entries());
    }
    for x in sample_optimal_coherent_inputs(2.0, 3, 20_000, 6).unwrap().iter().step_by(991) {
        v.extend(x);
    }
    let x = input_from_q(&sample_uniform_q(3, 0.7, 7).unwrap(), 2.0).unwrap();
    let b = simulate_block(&x, 40_000, 8).unwrap();
    v.extend(b.signs().iter().map(|&s| f64::from(s)));
    let t = estimator_mse_sweep(3, 0.7, &[50], 120, 9).unwrap();
    v.extend(t.rows.iter().map(|r| r.mse));
    let m = mi_mc_t3(512, 0.5, 40, 60, 10).unwrap();
    v.extend([m.estimate, m.std_err, m.bias_diag]);
    v.push(mi_exact_t2(2048, 0.5, Prior::Jeffreys, None).unwrap());
    let f = fisher_coherent_mc(&[0.3, 1.0], 30_000, 11).unwrap();
    v.extend(f.matrix.iter());
    v.extend(sample_jeffreys_t2(0.5, 20_000, 12).unwrap().iter().step_by(1000));
    v.into_iter().map(f64::to_bits).collect()
}

#[test]
fn results_are_bit_identical_across_pool_sizes_and_reruns() {
    let one = in_pool(1, fingerprint);
    assert_eq!(one, in_pool(1, fingerprint));
    assert_eq!(one, in_pool(4, fingerprint));
    assert_eq!(one, in_pool(8, fingerprint));
}

#[test]
fn different_seeds_differ() {
    let a = vol_q_mc(3, 0.8, 10_000, 1).unwrap();
    let b = vol_q_mc(3, 0.8, 10_000, 2).unwrap();
    assert_ne!(a.value, b.value);
}
