//! Sign-pattern distributions of a zero-mean Gaussian vector with
//! covariance `Σ(q)`, and their Fisher information.
//!
//! Patterns are indexed by an integer whose bit `k` is set iff `y_{k+1} = −1`,
//! so index 0 is the all-plus pattern and `!index` (masked) is `−y`.
//!
//! For `T = 2` the distribution depends on `q` through the disagreement
//! probability `μ1 = η(q)`. For `T = 3` it depends on the class
//! probabilities `μ_i = P{y_i ≠ y_j = y_k}` (`i = 1, 2, 3`) and
//! `μ0 = P{y_1 = y_2 = y_3}`, each class holding two opposite patterns.

use crate::covariance::{self, pair_count, CorrelationVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, McEstimate, Moments};
use crate::scalar::{eta, eta_clamped};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const SUM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Probability mass over the `2^T` sign patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    t: usize,
    pmf: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(t: usize, pmf: Vec<f64>) -> Result<Self> {
        if t == 0 || t > 24 {
            return Err(Error::invalid(format!("T = {t} is outside 1..=24")));
        }
        if pmf.len() != 1 << t {
            return Err(Error::invalid(format!("pmf for T = {t} needs {} entries", 1 << t)));
        }
        if pmf.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("pmf entries must be non-negative"));
        }
        let s: f64 = pmf.iter().sum();
        if (s - 1.0).abs() > SUM_TOL * 10.0 {
            return Err(Error::invalid(format!("pmf sums to {s}")));
        }
        Ok(OutcomeDistribution { t, pmf })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.pmf[index]
    }

    pub fn prob_of(&self, y: &[i8]) -> Result<f64> {
        Ok(self.pmf[pattern_index(y, self.t)?])
    }

    /// Total variation distance `½ Σ |p − p'|`.
    pub fn tv_distance(&self, other: &OutcomeDistribution) -> f64 {
        0.5 * self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Distribution of `(y_1, …, y_{T−1})`.
    pub fn marginalize_last(&self) -> OutcomeDistribution {
        let half = 1 << (self.t - 1);
        let pmf = (0..half).map(|i| self.pmf[i] + self.pmf[i + half]).collect();
        OutcomeDistribution { t: self.t - 1, pmf }
    }

    /// `P{y_i ≠ y_j}` (0-based indices).
    pub fn disagreement(&self, i: usize, j: usize) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(idx, _)| ((idx >> i) ^ (idx >> j)) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Index of a sign pattern; entries must be `±1`.
pub fn pattern_index(y: &[i8], t: usize) -> Result<usize> {
    if y.len() != t {
        return Err(Error::invalid(format!("pattern has {} entries, expected {t}", y.len())));
    }
    y.iter().enumerate().try_fold(0usize, |acc, (k, &s)| match s {
        1 => Ok(acc),
        -1 => Ok(acc | (1 << k)),
        _ => Err(Error::invalid(format!("sign entries must be +1 or -1, got {s}"))),
    })
}

pub fn pattern_signs(index: usize, t: usize) -> Vec<i8> {
    (0..t).map(|k| if (index >> k) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Class probabilities: `(μ0, μ1)` for `T = 2`, `(μ0, μ1, μ2, μ3)` for `T = 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuVector {
    mu: Vec<f64>,
}

impl MuVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.len() != 2 && mu.len() != 4 {
            return Err(Error::invalid("mu has 2 (T = 2) or 4 (T = 3) entries"));
        }
        if mu.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::invalid("mu entries must be non-negative"));
        }
        let s: f64 = mu.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("mu sums to {s}")));
        }
        Ok(MuVector { mu })
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn t(&self) -> usize {
        if self.mu.len() == 2 {
            2
        } else {
            3
        }
    }
}

// ---------------------------------------------------------------------------
// Exact pmfs for T = 2, 3
// ---------------------------------------------------------------------------

pub fn pmf_t2(q: f64) -> Result<OutcomeDistribution> {
    let mu1 = eta(q)?;
    let mu0 = 1.0 - mu1;
    Ok(OutcomeDistribution {
        t: 2,
        pmf: vec![mu0 / 2.0, mu1 / 2.0, mu1 / 2.0, mu0 / 2.0],
    })
}

/// Class of a `T = 3` pattern: 0 if all signs agree, else the 1-based
/// position of the odd sign.
pub fn class_t3(index: usize) -> usize {
    match index & 7 {
        0 | 7 => 0,
        b if b.count_ones() == 1 => b.trailing_zeros() as usize + 1,
        b => (!b & 7).trailing_zeros() as usize + 1,
    }
}

/// `(μ0, μ1, μ2, μ3)` for `q = (q12, q13, q23)` without validation.
pub(crate) fn mu_t3_values(q: &[f64]) -> [f64; 4] {
    let (e12, e13, e23) = (eta_clamped(q[0]), eta_clamped(q[1]), eta_clamped(q[2]));
    let m1 = 0.5 * (e12 + e13 - e23);
    let m2 = 0.5 * (e12 + e23 - e13);
    let m3 = 0.5 * (e13 + e23 - e12);
    [1.0 - m1 - m2 - m3, m1, m2, m3]
}

pub fn mu_t3(q: &CorrelationVector) -> Result<MuVector> {
    if q.t() != 3 {
        return Err(Error::invalid(format!("mu_t3 needs T = 3, got T = {}", q.t())));
    }
    let mut mu = mu_t3_values(q.entries());
    if let Some(m) = mu.iter().find(|m| **m < -1e-12) {
        return Err(Error::domain("mu_t3", format!("class probability {m} < 0: q is not a correlation vector")));
    }
    mu.iter_mut().for_each(|m| *m = m.max(0.0));
    Ok(MuVector { mu: mu.to_vec() })
}

pub fn pmf_t3(q: &CorrelationVector) -> Result<OutcomeDistribution> {
    let mu = mu_t3(q)?;
    let pmf = (0..8).map(|b| mu.mu[class_t3(b)] / 2.0).collect();
    Ok(OutcomeDistribution { t: 3, pmf })
}

/// Class probabilities read back from a `T = 3` pmf.
pub fn mu_from_pmf_t3(f: &OutcomeDistribution) -> Result<MuVector> {
    if f.t != 3 {
        return Err(Error::invalid("mu_from_pmf_t3 needs T = 3"));
    }
    let mut mu = vec![0.0; 4];
    for (b, p) in f.pmf.iter().enumerate() {
        mu[class_t3(b)] += p;
    }
    Ok(MuVector { mu })
}

/// Exact pmf for `T ∈ {2, 3}`.
pub fn pmf_exact(q: &CorrelationVector) -> Result<OutcomeDistribution> {
    match q.t() {
        2 => pmf_t2(q.entries()[0]),
        3 => pmf_t3(q),
        t => Err(Error::Unsupported(format!(
            "exact orthant probabilities only for T <= 3 (T = {t}); use pmf_mc"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo pmfs
// ---------------------------------------------------------------------------

/// Histogram of `sign(z)` over antithetic pairs `(z, −z)`, `z ~ N(0, Σ(q))`.
/// `n_samples` counts draws, so `n_samples/2` pairs (rounded up) are used.
pub fn pmf_mc(q: &CorrelationVector, n_samples: usize, seed: u64) -> Result<OutcomeDistribution> {
    let t = q.t();
    if t > 24 {
        return Err(Error::invalid("pmf_mc supports T <= 24"));
    }
    if n_samples < 2 {
        return Err(Error::invalid("pmf_mc needs at least 2 samples"));
    }
    let r = covariance::cholesky_jittered(covariance::sigma_of_q(q).matrix())?;
    let rf: Vec<f64> = (0..t * t).map(|k| r[(k / t, k % t)]).collect();
    let n_pairs = n_samples.div_ceil(2);
    let mask = (1usize << t) - 1;
    let seed = rng::derive_seed(seed, "pmf-mc", t as u64);
    let parts = rng::map_chunks(n_pairs, rng::CHUNK, seed, |rg, range| {
        let mut counts = vec![0u64; 1 << t];
        let mut g = vec![0.0; t];
        for _ in range {
            for v in g.iter_mut() {
                *v = rg.sample(StandardNormal);
            }
            let mut idx = 0usize;
            for k in 0..t {
                let mut z = 0.0;
                for p in 0..=k {
                    z += rf[p * t + k] * g[p];
                }
                if z < 0.0 {
                    idx |= 1 << k;
                }
            }
            counts[idx] += 1;
            counts[!idx & mask] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; 1 << t];
    for c in parts {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    let total = (2 * n_pairs) as f64;
    let pmf = counts.into_iter().map(|c| c as f64 / total).collect();
    Ok(OutcomeDistribution { t, pmf })
}

/// `f(y; q)` from the half-normal representation
/// `2^{−T} det(Σ)^{−1/2} E_u[exp(½ (u∘y)ᵀ(I − Σ⁻¹)(u∘y))]`, `u_k = |S_k|`.
///
/// The relative variance grows without bound as correlations approach one
/// and is infinite once `λ_max(Σ) ≥ 2`; both cases set a warning.
pub fn pmf_half_normal(q: &CorrelationVector, y: &[i8], n_samples: usize, seed: u64) -> Result<McEstimate> {
    let t = q.t();
    pattern_index(y, t)?;
    if n_samples < 2 {
        return Err(Error::invalid("pmf_half_normal needs at least 2 samples"));
    }
    let sigma = covariance::sigma_of_q(q);
    let m = sigma.matrix();
    let ln_det = linalg::ln_det_spd(m)
        .ok_or_else(|| Error::domain("pmf_half_normal", "Sigma(q) is not positive definite"))?;
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("pmf_half_normal", "Sigma(q) is singular"))?;
    let a = DMatrix::identity(t, t) - inv;
    let af: Vec<f64> = (0..t * t).map(|k| a[(k / t, k % t)]).collect();
    let ys: Vec<f64> = y.iter().map(|&s| f64::from(s)).collect();
    let seed = rng::derive_seed(seed, "pmf-half-normal", t as u64);
    let parts = rng::map_chunks(n_samples, rng::CHUNK, seed, |rg, range| {
        let mut v = vec![0.0; t];
        let mut acc = Moments::default();
        for _ in range {
            for k in 0..t {
                let u: f64 = rg.sample(StandardNormal);
                v[k] = u.abs() * ys[k];
            }
            let mut quad = 0.0;
            for i in 0..t {
                let mut row = 0.0;
                for j in 0..t {
                    row += af[i * t + j] * v[j];
                }
                quad += v[i] * row;
            }
            acc.push((0.5 * quad).exp());
        }
        acc
    });
    let scale = (-(t as f64) * std::f64::consts::LN_2 - 0.5 * ln_det).exp();
    let lmax = linalg::eigenvalues(m).last().copied().unwrap_or(1.0);
    let warning = if lmax >= 2.0 {
        Some(format!("lambda_max(Sigma) = {lmax:.4} >= 2: estimator variance is infinite"))
    } else if q.max_abs() > 0.9 {
        Some("correlations above 0.9: half-normal estimator variance is large".to_string())
    } else {
        None
    };
    Ok(McEstimate::from_moments(&rng::merge_moments(parts))
        .scaled(scale)
        .with_warning(warning))
}

// ---------------------------------------------------------------------------
// Fisher information
// ---------------------------------------------------------------------------

/// Fisher matrix in the free coordinates `(μ1, …)` with `μ0 = 1 − Σ μ_i`:
/// `J = diag(1/μ_i) + 1/μ0`. For `T = 2` this is the scalar `1/(μ1(1−μ1))`.
pub fn fisher_mu(mu: &MuVector) -> Result<DMatrix<f64>> {
    if mu.mu.iter().any(|m| *m <= 0.0) {
        return Err(Error::domain("fisher_mu", "singular on the boundary mu_i = 0"));
    }
    let k = mu.mu.len() - 1;
    let inv0 = 1.0 / mu.mu[0];
    Ok(DMatrix::from_fn(k, k, |i, j| inv0 + if i == j { 1.0 / mu.mu[i + 1] } else { 0.0 }))
}

/// `det J = ∏_i μ_i^{−1}` over all classes including `μ0`.
pub fn fisher_det_mu(mu: &MuVector) -> Result<f64> {
    if mu.mu.iter().any(|m| *m <= 0.0) {
        return Err(Error::domain("fisher_det_mu", "singular on the boundary mu_i = 0"));
    }
    Ok(mu.mu.iter().map(|m| 1.0 / m).product())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherQ {
    pub matrix: DMatrix<f64>,
    pub step: f64,
    /// Largest `|J_ij − J_ji|`.
    pub asymmetry: f64,
    /// Largest relative change of `J` when the step is halved.
    pub refinement_change: f64,
    /// Set when either diagnostic exceeds `1e-6`.
    pub step_too_large: bool,
}

impl FisherQ {
    pub fn sqrt_det(&self) -> f64 {
        self.matrix.determinant().max(0.0).sqrt()
    }
}

fn fisher_q_at(q: &CorrelationVector, h: f64) -> Result<DMatrix<f64>> {
    let t = q.t();
    let m = pair_count(t);
    let f0 = pmf_exact(q)?;
    let mut grads = Vec::with_capacity(m);
    for i in 0..m {
        let mut up = q.entries().to_vec();
        let mut dn = q.entries().to_vec();
        up[i] += h;
        dn[i] -= h;
        let fu = pmf_exact(&CorrelationVector::new(t, up)?)?;
        let fd = pmf_exact(&CorrelationVector::new(t, dn)?)?;
        grads.push(
            fu.pmf
                .iter()
                .zip(&fd.pmf)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    Ok(DMatrix::from_fn(m, m, |i, j| {
        f0.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(y, p)| grads[i][y] * grads[j][y] / p)
            .sum()
    }))
}

/// Fisher information in the `q` coordinates from central differences of
/// the exact pmf, `J_ij = Σ_y ∂_i f ∂_j f / f`. The default step is
/// `1e-4 (1 − max|q|)`.
pub fn fisher_q_numeric(q: &CorrelationVector, step: Option<f64>) -> Result<FisherQ> {
    if !(2..=3).contains(&q.t()) {
        return Err(Error::Unsupported(format!("fisher_q_numeric needs T in {{2, 3}}, got {}", q.t())));
    }
    let h = step.unwrap_or(1e-4 * (1.0 - q.max_abs()));
    if !(h > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive (h = {h})")));
    }
    let stepped = |h: f64| -> Result<DMatrix<f64>> {
        let mut probe = q.entries().to_vec();
        for i in 0..probe.len() {
            for s in [-h, h] {
                probe[i] += s;
                let moved = CorrelationVector::new(q.t(), probe.clone())?;
                if q.t() == 3 && mu_t3_values(moved.entries()).iter().any(|m| *m <= 0.0) {
                    return Err(Error::domain("fisher_q_numeric", "q is not interior for this step"));
                }
                probe[i] -= s;
            }
        }
        fisher_q_at(q, h)
    };
    let j = stepped(h)?;
    let j_half = stepped(0.5 * h)?;
    let scale = j.abs().max().max(f64::MIN_POSITIVE);
    let refinement_change = (&j - &j_half).abs().max() / scale;
    let asymmetry = linalg::max_asymmetry(&j);
    Ok(FisherQ {
        step_too_large: asymmetry > 1e-6 || refinement_change > 1e-6,
        matrix: j,
        step: h,
        asymmetry,
        refinement_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn t2_examples() {
        assert_eq!(pmf_t2(0.0).unwrap().pmf(), &[0.25; 4]);
        let one = pmf_t2(1.0).unwrap();
        assert_eq!(one.pmf(), &[0.5, 0.0, 0.0, 0.5]);
        let half = pmf_t2(0.5).unwrap();
        assert!((half.prob_of(&[1, -1]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(pmf_t2(1.1).is_err());
    }

    #[test]
    fn t3_examples() {
        let z = CorrelationVector::zeros(3).unwrap();
        assert_eq!(mu_t3(&z).unwrap().values(), &[0.25; 4]);
        let g = CorrelationVector::constant(3, 0.5).unwrap();
        let mu = mu_t3(&g).unwrap();
        for m in &mu.values()[1..] {
            assert!((m - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((mu.values()[0] - 0.5).abs() < 1e-15);
        let bad = CorrelationVector::new(3, vec![0.9, 0.9, -0.9]).unwrap();
        assert!(mu_t3(&bad).is_err());
    }

    #[test]
    fn classes_pair_opposites() {
        for b in 0..8 {
            assert_eq!(class_t3(b), class_t3(!b & 7));
        }
        assert_eq!(class_t3(0b001), 1);
        assert_eq!(class_t3(0b110), 1);
        assert_eq!(class_t3(0b010), 2);
        assert_eq!(class_t3(0b100), 3);
    }

    #[test]
    fn pattern_indexing() {
        assert_eq!(pattern_index(&[1, 1, 1], 3).unwrap(), 0);
        assert_eq!(pattern_index(&[-1, 1, -1], 3).unwrap(), 0b101);
        assert_eq!(pattern_signs(0b101, 3), vec![-1, 1, -1]);
        assert!(pattern_index(&[1, 0], 2).is_err());
    }

    #[test]
    fn fisher_mu_examples() {
        let mu = MuVector::new(vec![0.25; 4]).unwrap();
        assert!((fisher_det_mu(&mu).unwrap() - 256.0).abs() < 1e-10);
        assert!((fisher_mu(&mu).unwrap().determinant() - 256.0).abs() < 1e-9);
        let half = MuVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(fisher_mu(&half).unwrap()[(0, 0)], 4.0);
        assert_eq!(fisher_det_mu(&half).unwrap(), 4.0);
        assert!(fisher_mu(&MuVector::new(vec![1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn fisher_q_low_correlation() {
        let j = fisher_q_numeric(&CorrelationVector::zeros(2).unwrap(), None).unwrap();
        assert!((j.matrix[(0, 0)] - 4.0 / (PI * PI)).abs() < 1e-8);
        assert!(!j.step_too_large);
        let j = fisher_q_numeric(&CorrelationVector::new(2, vec![0.01]).unwrap(), None).unwrap();
        assert!((j.sqrt_det() / (2.0 / PI) - 1.0).abs() < 0.01);
        let j3 = fisher_q_numeric(&CorrelationVector::zeros(3).unwrap(), None).unwrap();
        assert!((j3.sqrt_det() / (2.0 / PI).powi(3) - 1.0).abs() < 0.01);
        let big = fisher_q_numeric(&CorrelationVector::new(2, vec![0.3]).unwrap(), Some(0.2)).unwrap();
        assert!(big.step_too_large);
    }

    #[test]
    fn half_normal_independent_case() {
        let z = CorrelationVector::zeros(3).unwrap();
        let f = pmf_half_normal(&z, &[1, -1, 1], 1000, 5).unwrap();
        assert!((f.value - 0.125).abs() < 1e-15);
        assert_eq!(f.std_err, 0.0);
    }
}
