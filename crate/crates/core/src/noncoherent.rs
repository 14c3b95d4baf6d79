//! Non-coherent block-fading channel with coherence time `T`.
//!
//! For `T ∈ {2, 3}` the large-`n_r` capacity is
//!
//! ```text
//! C = (T−1)/4 log2(n_r / 2πe) + (1/T) log2 α_T,
//! ```
//!
//! with `α_2 = 4 arccos(√(arccos(γ)/π)) − π` in closed form and `α_3` an
//! integral over `Q_γ` estimated by Monte Carlo. For larger `T` only bounds
//! are available: a uniform-input lower bound, an independent-pair lower
//! bound and a genie-aided upper bound, plus their large-`T` forms.

use crate::capacity::{CapacityEstimate, CapacityTerms, Method};
use crate::coherent::zeta0;
use crate::covariance::{self, pair_count, UniformQSampler, VolumePrecision};
use crate::error::{Error, Result};
use crate::orthant::mu_t3_values;
use crate::rng::{self, McConfig, McEstimate, Moments};
use crate::scalar::ln_gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2, LOG2_E, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoncoherentParams {
    pub snr: f64,
    pub t: usize,
    pub nt: usize,
    pub nr: u64,
}

impl NoncoherentParams {
    pub fn new(snr: f64, t: usize, nt: usize, nr: u64) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::invalid(format!("snr must be positive and finite (snr = {snr})")));
        }
        if t < 2 {
            return Err(Error::invalid(format!("T must be at least 2 (T = {t})")));
        }
        if nt < t {
            return Err(Error::invalid(format!("nt must be at least T (nt = {nt}, T = {t})")));
        }
        if nr == 0 {
            return Err(Error::invalid("nr must be at least 1"));
        }
        Ok(NoncoherentParams { snr, t, nt, nr })
    }

    /// Parameters at a given `γ ∈ (0, 1)`, with `n_t = T`.
    pub fn from_gamma(gamma: f64, t: usize, nr: u64) -> Result<Self> {
        covariance::check_gamma(gamma, false)?;
        Self::new(gamma / (1.0 - gamma), t, t, nr)
    }

    pub fn gamma(&self) -> f64 {
        self.snr / (1.0 + self.snr)
    }

    fn dimension_term(&self) -> f64 {
        (self.t as f64 - 1.0) / 4.0 * (self.nr as f64 / (2.0 * PI * E)).log2()
    }
}

// ---------------------------------------------------------------------------
// α for T = 2, 3
// ---------------------------------------------------------------------------

/// `α_2(γ) = 4 arccos(√(arccos(γ)/π)) − π`, the Jeffreys normalizer for
/// `T = 2`. Satisfies `4γ/π ≤ α_2 ≤ πγ`.
pub fn alpha_t2(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1) (gamma = {gamma})")));
    }
    Ok(4.0 * (gamma.acos() / PI).sqrt().acos() - PI)
}

/// `α_3(γ) = ∫ ∏_{k=0}^{3} μ_k^{−1/2} dμ`, pulled back to `q ∈ Q_γ`:
/// `Vol(Q_γ) · E_q[½ π^{−3} ∏_k μ_k(q)^{−1/2} ∏_i (1 − q_i²)^{−1/2}]` with `q`
/// uniform on `Q_γ`.
pub fn alpha_t3(gamma: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    covariance::check_gamma(gamma, false)?;
    if n_samples < 2 {
        return Err(Error::invalid("alpha_t3 needs at least 2 samples"));
    }
    let seed = rng::derive_seed(seed, "alpha-t3", 0);
    let parts = rng::map_chunks(n_samples, rng::CHUNK, seed, |r, range| {
        let mut sampler = UniformQSampler::new(3, gamma).expect("gamma checked");
        let mut q = [0.0; 3];
        let mut acc = Moments::default();
        for _ in range {
            sampler.fill(r, &mut q);
            acc.push(alpha_t3_integrand(&q));
        }
        acc
    });
    let vol = covariance::vol_q_exact(3, gamma)?;
    let warning = (gamma > 0.95).then(|| format!("gamma = {gamma} > 0.95: integrand is near-singular"));
    Ok(McEstimate::from_moments(&rng::merge_moments(parts))
        .scaled(vol)
        .with_warning(warning))
}

fn alpha_t3_integrand(q: &[f64]) -> f64 {
    let mu = mu_t3_values(q);
    let prod_mu: f64 = mu.iter().product();
    let prod_q: f64 = q.iter().map(|v| 1.0 - v * v).product();
    0.5 / (PI * PI * PI) / (prod_mu * prod_q).sqrt()
}

/// Large-`n_r` capacity for `T ∈ {2, 3}`. `T = 3` uses [`alpha_t3`] with
/// the given Monte Carlo budget; `T ≥ 4` is refused.
pub fn capacity_noncoherent_exact(p: &NoncoherentParams, mc: &McConfig) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let gamma = p.gamma();
    let (ln_alpha, rel_err, warning) = match p.t {
        2 => (alpha_t2(gamma)?.ln(), None, None),
        3 => {
            let a = alpha_t3(gamma, mc.samples, mc.seed)?;
            (a.value.ln(), Some(a.std_err / a.value), a.warning)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "exact capacity is only available for T in {{2, 3}} (T = {}); \
                 use the bounds lb-uniform, lb-indep or ub-genie",
                p.t
            )))
        }
    };
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: 0.0,
        alpha: ln_alpha / (t * LN_2),
    };
    let mut c = CapacityEstimate::from_terms(terms, Method::ExactAsymptotic, true).with_warning(warning);
    c.std_err = rel_err.map(|r| r / (t * LN_2));
    Ok(c)
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Uniform-input lower bound, valid for every `n_r`:
/// `(T−1)/4 log2(γ² n_r/(2π³e)) + (1/T) log2 Vol(Q_1)`.
///
/// Split as the usual dimension term, `α = (T−1)/2 log2(γ/π)` and the
/// volume term.
pub fn capacity_lb_uniform(p: &NoncoherentParams) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: covariance::log2_vol_q_exact(p.t, 1.0)? / t,
        alpha: 0.5 * (t - 1.0) * (p.gamma() / PI).log2(),
    };
    Ok(CapacityEstimate::from_terms(terms, Method::BoundLb, false))
}

/// Independent-pair lower bound `(T−1)/4 log2(8γ² n_r / (π³ e (T−1)²))`.
pub fn capacity_lb_indep(p: &NoncoherentParams) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let g = p.gamma() / (t - 1.0);
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: 0.0,
        alpha: 0.25 * (t - 1.0) * (16.0 * g * g / (PI * PI)).log2(),
    };
    Ok(CapacityEstimate::from_terms(terms, Method::BoundLb, true))
}

/// The independent-pair rate before the `α_2 ≥ 4γ/π` relaxation: each of
/// the `T(T−1)/2` pairs runs the `T = 2` scheme on `|q| ≤ γ/(T−1)`, giving
/// `(T−1)/4 log2(n_r/2πe) + (T−1)/2 log2 α_2(γ/(T−1))`.
pub fn capacity_lb_indep_exact(p: &NoncoherentParams) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: 0.0,
        alpha: 0.5 * (t - 1.0) * alpha_t2(p.gamma() / (t - 1.0))?.log2(),
    };
    Ok(CapacityEstimate::from_terms(terms, Method::BoundLb, true))
}

/// `(1/T) Σ_{i=2}^{T} log2(π^{i/2}/Γ(i/2))`.
pub fn sum_log_gamma_exact(t: usize) -> f64 {
    let s: f64 = (2..=t)
        .map(|i| {
            let h = i as f64 / 2.0;
            h * PI.ln() - ln_gamma(h)
        })
        .sum();
    s / (t as f64 * LN_2)
}

/// Large-`T` form of [`sum_log_gamma_exact`]:
/// `(T−1)/4 log2(2π e^{3/2}/T) + (1/8) log2(e/16)`.
pub fn sum_log_gamma_asymptotic(t: usize) -> f64 {
    let tf = t as f64;
    (tf - 1.0) / 4.0 * (2.0 * PI * E.powf(1.5) / tf).log2() + (E / 16.0).log2() / 8.0
}

/// Genie-aided upper bound
/// `(T−1)/4 log2(snr ζ0(√snr) n_r/2πe) + (1/T) Σ_{i=2}^{T} log2(π^{i/2}/Γ(i/2))`.
pub fn capacity_ub_genie(p: &NoncoherentParams) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: sum_log_gamma_exact(p.t),
        alpha: 0.25 * (t - 1.0) * (p.snr * zeta0(p.snr.sqrt())).log2(),
    };
    Ok(CapacityEstimate::from_terms(terms, Method::BoundUb, true))
}

/// Low-SNR capacity: the large-`n_r` law with `√det J = (2/π)^{T(T−1)/2}`,
/// that is `α = (2/π)^{T(T−1)/2} Vol(Q_γ)`:
/// `(T−1)/4 log2(2γ² n_r/(π³e)) + (1/T) log2 Vol(Q_1)`.
///
/// This exceeds [`capacity_lb_uniform`] by exactly `(T−1)/2` bits: the
/// uniform input is still the right input, but the estimator-based bound
/// gives away a factor 4 in the argument of the logarithm.
pub fn capacity_low_snr(p: &NoncoherentParams) -> Result<CapacityEstimate> {
    let t = p.t as f64;
    let gamma = p.gamma();
    let terms = CapacityTerms {
        dimension: p.dimension_term(),
        volume: covariance::log2_vol_q_exact(p.t, 1.0)? / t,
        alpha: 0.5 * (t - 1.0) * (2.0 * gamma / PI).log2(),
    };
    let warning = (gamma > 0.1).then(|| format!("low-SNR law used at gamma = {gamma:.4}"));
    Ok(CapacityEstimate::from_terms(terms, Method::LowSnr, true).with_warning(warning))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeTWindow {
    pub lb: f64,
    pub ub: f64,
    pub warning: Option<String>,
}

/// Large-`T` capacity window, bits per channel use:
///
/// - `lb = (T−1)/4 log2(γ² n_r/(π² √e T)) − log2(e)/8`
/// - `ub = (T−1)/4 log2(snr ζ0(√snr) √e n_r/T) + (1/8) log2(e/16)`
pub fn capacity_large_t_window(p: &NoncoherentParams) -> Result<LargeTWindow> {
    let t = p.t as f64;
    let g = p.gamma();
    let nr = p.nr as f64;
    let lb = (t - 1.0) / 4.0 * (g * g * nr / (PI * PI * E.sqrt() * t)).log2() - LOG2_E / 8.0;
    let ub = (t - 1.0) / 4.0 * (p.snr * zeta0(p.snr.sqrt()) * E.sqrt() * nr / t).log2()
        + (E / 16.0).log2() / 8.0;
    if lb > ub {
        return Err(Error::domain("capacity_large_t_window", format!("lb {lb} exceeds ub {ub}")));
    }
    let warning = (p.t < 10).then(|| format!("large-T window used at T = {}", p.t));
    Ok(LargeTWindow { lb, ub, warning })
}

/// [`capacity_lb_uniform`] with the log-volume replaced by its large-`T`
/// expansion.
pub fn capacity_lb_uniform_asymptotic(p: &NoncoherentParams, precision: VolumePrecision) -> f64 {
    let t = p.t as f64;
    p.dimension_term()
        + 0.5 * (t - 1.0) * (p.gamma() / PI).log2()
        + covariance::log_vol_q_asymptotic(p.t, precision) / t
}

/// Number of real parameters `T(T−1)/2` per block.
pub fn parameter_dimension(t: usize) -> usize {
    pair_count(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_t2_values() {
        assert!(alpha_t2(0.0).unwrap().abs() < 1e-15);
        assert!((alpha_t2(0.5).unwrap() - 0.679_673_8).abs() < 1e-7);
        for i in 1..=100 {
            let g = i as f64 / 101.0;
            let a = alpha_t2(g).unwrap();
            assert!(4.0 * g / PI <= a && a <= PI * g, "g={g}");
        }
        assert!(alpha_t2(1.0).is_err());
    }

    #[test]
    fn exact_t2_value_and_scaling() {
        let p = NoncoherentParams::from_gamma(0.5, 2, 4096).unwrap();
        let c = capacity_noncoherent_exact(&p, &McConfig::default()).unwrap();
        let direct = 0.25 * (4096.0 / (2.0 * PI * E)).log2() + 0.5 * alpha_t2(0.5).unwrap().log2();
        assert!((c.bits_per_use - direct).abs() < 1e-14);
        assert!((c.bits_per_use - 1.6978).abs() < 1e-3);
        let c2 = capacity_noncoherent_exact(&NoncoherentParams { nr: 8192, ..p }, &McConfig::default()).unwrap();
        assert!((c2.bits_per_use - c.bits_per_use - 0.25).abs() < 1e-12);
        let t4 = NoncoherentParams::from_gamma(0.5, 4, 4096).unwrap();
        assert!(matches!(capacity_noncoherent_exact(&t4, &McConfig::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lb_uniform_reference() {
        let p = NoncoherentParams::from_gamma(0.5, 2, 10_000).unwrap();
        let c = capacity_lb_uniform(&p).unwrap();
        let direct = 0.25 * (0.25 * 1e4 / (2.0 * PI.powi(3) * E)).log2() + 0.5;
        assert!((c.bits_per_use - direct).abs() < 1e-13);
        assert!((c.bits_per_use - 1.4727).abs() < 1e-3);
    }

    #[test]
    fn indep_exact_degenerates_at_t2() {
        let p = NoncoherentParams::from_gamma(0.3, 2, 1 << 20).unwrap();
        let a = capacity_lb_indep_exact(&p).unwrap().bits_per_use;
        let b = capacity_noncoherent_exact(&p, &McConfig::default()).unwrap().bits_per_use;
        assert!((a - b).abs() < 1e-14);
        assert!(capacity_lb_indep(&p).unwrap().bits_per_use <= a);
    }

    #[test]
    fn log_gamma_sums() {
        assert!((sum_log_gamma_exact(2) - 0.5 * PI.log2()).abs() < 1e-14);
        let gap = |t: usize| (sum_log_gamma_exact(t) - sum_log_gamma_asymptotic(t)).abs();
        assert!(gap(60) < 0.05);
        assert!(gap(200) < gap(50));
    }

    #[test]
    fn low_snr_offset_from_lb() {
        for t in [2, 3, 6] {
            let p = NoncoherentParams::from_gamma(0.05, t, 1_000_000).unwrap();
            let lo = capacity_low_snr(&p).unwrap().bits_per_use;
            let lb = capacity_lb_uniform(&p).unwrap().bits_per_use;
            assert!((lo - lb - 0.5 * (t as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn window_ordering() {
        let p = NoncoherentParams::new(1.0, 40, 40, 1_000_000_000).unwrap();
        let w = capacity_large_t_window(&p).unwrap();
        assert!(w.lb <= w.ub);
        let coarse = capacity_lb_uniform_asymptotic(&p, VolumePrecision::Coarse);
        assert!((coarse - w.lb).abs() < 1e-10);
    }
}
