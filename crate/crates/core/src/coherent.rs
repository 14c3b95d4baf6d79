//! Coherent 1-bit MIMO channel: the `ζ` integrals, the Fisher determinant of
//! the sign-output model and the large-`n_r` capacity
//!
//! ```text
//! C = (n_t/2) log2(n_r / 2πe) + log2 Vol(B_{n_t}) + log2 α,
//! α = ∫_0^{√snr} ζ0(r)^{(n_t−1)/2} ζ2(r)^{1/2} n_t r^{n_t−1} dr.
//! ```
//!
//! `ζ_k(t) = E[S^k ξ(tS)]` with `S ~ N(0,1)`. For `t ≤ 1` it is a 128-node
//! Gauss–Hermite sum. Above that `ξ(tS)` is too narrow for a fixed rule, so
//! the integral is taken in `u = tS`, `ζ_k(t) = t^{−k−1} ∫ u^k ξ(u) φ(u/t) du`,
//! by adaptive quadrature.

use crate::capacity::{CapacityEstimate, CapacityTerms, Method};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_pieces, gauss_hermite};
use crate::rng;
use crate::scalar::{self, log_xi, xi};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{E, LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

/// Beyond this `|u|`, `ξ(u) < e^{−780}` and contributes nothing.
const XI_CUTOFF: f64 = 40.0;
const ZETA_BREAKS: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, XI_CUTOFF];
const GH_LIMIT: f64 = 1.0;
const GH_NODES: usize = 128;
const RADIAL_KNOTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams {
    pub snr: f64,
    pub nt: u32,
    pub nr: u64,
}

impl CoherentParams {
    pub fn new(snr: f64, nt: u32, nr: u64) -> Result<Self> {
        check_snr(snr)?;
        if nt == 0 {
            return Err(Error::invalid("nt must be at least 1"));
        }
        if nr == 0 {
            return Err(Error::invalid("nr must be at least 1"));
        }
        Ok(CoherentParams { snr, nt, nr })
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("snr must be positive and finite (snr = {snr})")))
    }
}

// ---------------------------------------------------------------------------
// ζ integrals and constants
// ---------------------------------------------------------------------------

fn zeta_k(k: i32, t: f64) -> f64 {
    if t == 0.0 {
        2.0 / PI
    } else if t <= GH_LIMIT {
        zeta_hermite(k, t)
    } else {
        zeta_substituted(k, t)
    }
}

fn zeta_hermite(k: i32, t: f64) -> f64 {
    gauss_hermite(GH_NODES).expect(|s| s.powi(k) * xi(t * s))
}

fn zeta_substituted(k: i32, t: f64) -> f64 {
    let f = |u: f64| u.powi(k) * (log_xi(u) - 0.5 * (u / t).powi(2)).exp();
    let r = adaptive_pieces(&f, &ZETA_BREAKS, 0.0, 1e-13, 400)
        .map(|r| r.value)
        .unwrap_or_else(|e| match e {
            Error::NonConvergence { estimate, .. } => estimate,
            _ => f64::NAN,
        });
    2.0 * scalar::FRAC_1_SQRT_2PI * r / t.powi(k + 1)
}

pub(crate) fn zeta0(t: f64) -> f64 {
    zeta_k(0, t)
}

pub(crate) fn zeta2(t: f64) -> f64 {
    zeta_k(2, t)
}

/// `ζ_k(t) = E[S^k ξ(tS)]` for `k ∈ {0, 2}`, `t ≥ 0`.
pub fn zeta(k: u32, t: f64) -> Result<f64> {
    if k != 0 && k != 2 {
        return Err(Error::invalid(format!("zeta is defined for k in {{0, 2}} (k = {k})")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("zeta", format!("t must be finite and >= 0 (t = {t})")));
    }
    Ok(zeta_k(k as i32, t))
}

/// `ζ0′(t)` by central difference with step `1e-5 max(1, t)`.
pub fn zeta0_derivative(t: f64) -> f64 {
    let h = 1e-5 * t.max(1.0);
    let lo = (t - h).max(0.0);
    (zeta0(t + h) - zeta0(lo)) / (t + h - lo)
}

/// Large-`t` constants: `t ζ0(t) → A0` and `t³ ζ2(t) → A2`, with
/// `A0 = (2π)^{−1/2} ∫ ξ` and `A2 = (2π)^{−1/2} ∫ u² ξ(u) du`.
pub fn a_constants() -> (f64, f64) {
    static A: OnceLock<(f64, f64)> = OnceLock::new();
    *A.get_or_init(|| {
        let c = 2.0 * scalar::FRAC_1_SQRT_2PI;
        let i0 = adaptive_pieces(&xi, &ZETA_BREAKS, 0.0, 1e-14, 1000).expect("smooth integrand");
        let i2 = adaptive_pieces(&|u: f64| u * u * xi(u), &ZETA_BREAKS, 0.0, 1e-14, 1000)
            .expect("smooth integrand");
        (c * i0.value, c * i2.value)
    })
}

/// `ln(ζ0(r)^{n_t−1} ζ2(r))`.
pub fn ln_fisher_det_coherent(r: f64, nt: u32) -> f64 {
    f64::from(nt - 1) * zeta0(r).ln() + zeta2(r).ln()
}

/// Determinant of the Fisher matrix of one receive antenna at input `x`,
/// which depends on `x` only through `r = ‖x‖`: `ζ0(r)^{n_t−1} ζ2(r)`.
pub fn fisher_det_coherent(r: f64, nt: u32) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain("fisher_det_coherent", format!("r must be >= 0 (r = {r})")));
    }
    if nt == 0 {
        return Err(Error::invalid("nt must be at least 1"));
    }
    Ok(ln_fisher_det_coherent(r, nt).exp())
}

// ---------------------------------------------------------------------------
// α and the capacity
// ---------------------------------------------------------------------------

/// `ln` of the radial Jeffreys density (unnormalized) including the `n_t`
/// factor: `((n_t−1)/2) ln ζ0 + ½ ln ζ2 + ln n_t + (n_t−1) ln r`.
fn ln_alpha_integrand(r: f64, nt: u32) -> f64 {
    let m = f64::from(nt - 1);
    if r == 0.0 {
        return if nt == 1 { 0.5 * (2.0 / PI).ln() } else { f64::NEG_INFINITY };
    }
    0.5 * m * zeta0(r).ln() + 0.5 * zeta2(r).ln() + f64::from(nt).ln() + m * r.ln()
}

/// Geometric breakpoints `R 2^{−k}` down to `10^{−3} min(R, 1)`, then 0.
fn radial_breaks(big_r: f64) -> Vec<f64> {
    let floor = 1e-3 * big_r.min(1.0);
    let mut b = vec![big_r];
    while *b.last().unwrap() > floor {
        let next = b.last().unwrap() * 0.5;
        b.push(next);
    }
    b.push(0.0);
    b.reverse();
    b
}

/// `ln α`, robust to overflow for large `n_t`.
pub fn ln_alpha_coherent(snr: f64, nt: u32) -> Result<f64> {
    check_snr(snr)?;
    if nt == 0 {
        return Err(Error::invalid("nt must be at least 1"));
    }
    let big_r = snr.sqrt();
    let breaks = radial_breaks(big_r);
    let shift = breaks[1..]
        .iter()
        .map(|&r| ln_alpha_integrand(r, nt))
        .fold(f64::NEG_INFINITY, f64::max);
    let f = |r: f64| (ln_alpha_integrand(r, nt) - shift).exp();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive(&f, w[0], w[1], 0.0, 1e-11, 2000)?.value;
    }
    Ok(shift + total.ln())
}

pub fn alpha_coherent(snr: f64, nt: u32) -> Result<f64> {
    Ok(ln_alpha_coherent(snr, nt)?.exp())
}

/// Large-`n_r` capacity of the coherent channel, bits per channel use.
pub fn capacity_coherent(p: &CoherentParams) -> Result<CapacityEstimate> {
    let nt = f64::from(p.nt);
    let terms = CapacityTerms {
        dimension: 0.5 * nt * (p.nr as f64 / (2.0 * PI * E)).log2(),
        volume: scalar::log2_vol_ball(p.nt),
        alpha: ln_alpha_coherent(p.snr, p.nt)? / LN_2,
    };
    Ok(CapacityEstimate::from_terms(terms, Method::ExactAsymptotic, true))
}

// ---------------------------------------------------------------------------
// Asymptotic regimes of α
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LowSnr,
    HighSnr,
    LargeNt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaAsymptotic {
    pub value: f64,
    pub ln_value: f64,
    pub regime: Regime,
    /// Set when the parameters are outside the regime's range of validity.
    pub warning: Option<String>,
}

/// `∫_0^∞ √ζ2(r) dr`, the high-SNR limit of `α` for a single antenna.
pub fn high_snr_constant_nt1() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let big_r: f64 = 1e6;
        let f = |r: f64| zeta2(r).sqrt();
        let breaks = radial_breaks(big_r);
        let body: f64 = breaks
            .windows(2)
            .map(|w| adaptive(&f, w[0], w[1], 0.0, 1e-11, 2000).map(|r| r.value).unwrap_or(f64::NAN))
            .sum();
        // ζ2(r) = A2/r³ (1 + O(r^{−2})), so the tail is 2√A2/√R.
        let (_, a2) = a_constants();
        body + 2.0 * a2.sqrt() / big_r.sqrt()
    })
}

/// Closed-form equivalents of `α`:
///
/// - low SNR (`n_t snr → 0`): `(2 snr/π)^{n_t/2}`;
/// - high SNR: `∫_0^∞ √ζ2` (`n_t = 1`), `√(A0 A2) ln snr` (`n_t = 2`),
///   `2n_t/(n_t−2) A0^{(n_t−1)/2} √A2 snr^{(n_t−2)/4}` (`n_t ≥ 3`);
/// - large `n_t` (Laplace at the upper end):
///   `√ζ0 √ζ2 / (ζ0 + (√snr/2) ζ0′) · (snr ζ0)^{n_t/2}`, all at `√snr`.
pub fn alpha_asymptotic(snr: f64, nt: u32, regime: Regime) -> Result<AlphaAsymptotic> {
    check_snr(snr)?;
    if nt == 0 {
        return Err(Error::invalid("nt must be at least 1"));
    }
    let n = f64::from(nt);
    let (ln_value, warning) = match regime {
        Regime::LowSnr => {
            let w = (n * snr > 0.1).then(|| format!("low-SNR equivalent used with nt*snr = {}", n * snr));
            (0.5 * n * (2.0 * snr / PI).ln(), w)
        }
        Regime::HighSnr => {
            let w = (snr < 100.0).then(|| format!("high-SNR equivalent used with snr = {snr}"));
            let (a0, a2) = a_constants();
            let v = match nt {
                1 => high_snr_constant_nt1().ln(),
                2 => 0.5 * (a0 * a2).ln() + snr.ln().ln(),
                _ => {
                    (2.0 * n / (n - 2.0)).ln()
                        + 0.5 * (n - 1.0) * a0.ln()
                        + 0.5 * a2.ln()
                        + 0.25 * (n - 2.0) * snr.ln()
                }
            };
            if nt == 2 && snr <= 1.0 {
                return Err(Error::domain("alpha_asymptotic", "nt = 2 high-SNR form needs snr > 1"));
            }
            (v, w)
        }
        Regime::LargeNt => {
            let w = (nt < 20).then(|| format!("large-nt equivalent used with nt = {nt}"));
            let t = snr.sqrt();
            let z0 = zeta0(t);
            let z2 = zeta2(t);
            let d = zeta0_derivative(t);
            let denom = z0 + 0.5 * t * d;
            if denom <= 0.0 {
                return Err(Error::domain("alpha_asymptotic", "Laplace prefactor is not positive"));
            }
            (0.5 * (z0 * z2).ln() - denom.ln() + 0.5 * n * (snr * z0).ln(), w)
        }
    };
    Ok(AlphaAsymptotic { value: ln_value.exp(), ln_value, regime, warning })
}

// ---------------------------------------------------------------------------
// Spherical inputs
// ---------------------------------------------------------------------------

/// Fisher determinant on the sphere `‖x‖ = √snr`, parameterized by the
/// first `n_t − 1` coordinates `x̃`: `ζ0(√snr)^{n_t−1} / (1 − ‖x̃‖²/snr)`.
pub fn fisher_det_spherical(x_tilde: &[f64], snr: f64, nt: u32) -> Result<f64> {
    check_snr(snr)?;
    if nt < 2 || x_tilde.len() != (nt - 1) as usize {
        return Err(Error::invalid(format!(
            "x_tilde must have nt - 1 = {} entries",
            nt.saturating_sub(1)
        )));
    }
    let n2: f64 = x_tilde.iter().map(|v| v * v).sum();
    if n2 >= snr {
        return Err(Error::domain("fisher_det_spherical", "||x_tilde||^2 >= snr"));
    }
    Ok((f64::from(nt - 1) * zeta0(snr.sqrt()).ln()).exp() / (1.0 - n2 / snr))
}

/// `∫ √det` of [`fisher_det_spherical`] over the ball `‖x̃‖² < snr`, by
/// radial quadrature after `ρ = √snr sin θ`, which removes the endpoint
/// singularity.
pub fn spherical_fisher_integral(snr: f64, nt: u32) -> Result<f64> {
    check_snr(snr)?;
    if nt < 2 {
        return Err(Error::invalid("spherical inputs need nt >= 2"));
    }
    let m = f64::from(nt - 1);
    let z0 = zeta0(snr.sqrt());
    let radial = if nt == 2 {
        // Zero-dimensional "sphere" S_0 = {±1}; ∫_{-√snr}^{√snr} (1−ρ²/snr)^{−1/2} dρ.
        PI * snr.sqrt() / 2.0
    } else {
        let f = |th: f64| th.sin().powf(m - 1.0);
        snr.powf(0.5 * m) * adaptive(&f, 0.0, PI / 2.0, 0.0, 1e-13, 1000)?.value
    };
    let shell = if nt == 2 { 2.0 } else { scalar::area_sphere(nt - 1) };
    Ok(z0.powf(0.5 * m) * shell * radial)
}

/// Large-`n_r` capacity when inputs are constrained to the sphere
/// `‖x‖ = √snr`.
pub fn capacity_coherent_spherical(p: &CoherentParams) -> Result<CapacityEstimate> {
    if p.nt < 2 {
        return Err(Error::invalid("spherical inputs need nt >= 2"));
    }
    let m = f64::from(p.nt - 1);
    let terms = CapacityTerms {
        dimension: 0.5 * m * (p.nr as f64 / (2.0 * PI * E)).log2(),
        volume: (scalar::ln_area_sphere(p.nt) - LN_2) / LN_2,
        alpha: 0.5 * m * (p.snr * zeta0(p.snr.sqrt())).log2(),
    };
    Ok(CapacityEstimate::from_terms(terms, Method::ExactAsymptotic, true))
}

// ---------------------------------------------------------------------------
// Capacity-achieving input sampler
// ---------------------------------------------------------------------------

/// Inverse CDF of the radial law `p(r) ∝ ζ0^{(n_t−1)/2} ζ2^{1/2} r^{n_t−1}` on
/// `[0, √snr]`, tabulated on 4096 knots and interpolated by a monotone cubic.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    snr: f64,
    nt: u32,
    knots: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
}

impl RadialSampler {
    pub fn new(snr: f64, nt: u32) -> Result<Self> {
        check_snr(snr)?;
        if nt == 0 {
            return Err(Error::invalid("nt must be at least 1"));
        }
        let big_r = snr.sqrt();
        // sinh-spaced knots: uniform for small R, geometric-like near 0 for large R.
        let c = big_r.asinh();
        let n = RADIAL_KNOTS;
        let knots: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { big_r } else { big_r * (c * i as f64 / (n - 1) as f64).sinh() / c.sinh() })
            .collect();
        let ln_at: Vec<f64> = knots.iter().map(|&r| ln_alpha_integrand(r, nt)).collect();
        let mids: Vec<f64> = knots.windows(2).map(|w| ln_alpha_integrand(0.5 * (w[0] + w[1]), nt)).collect();
        let shift = ln_at.iter().chain(&mids).copied().fold(f64::NEG_INFINITY, f64::max);
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            let h = knots[i] - knots[i - 1];
            let simpson = h / 6.0
                * ((ln_at[i - 1] - shift).exp() + 4.0 * (mids[i - 1] - shift).exp() + (ln_at[i] - shift).exp());
            cdf[i] = cdf[i - 1] + simpson;
        }
        let total = cdf[n - 1];
        cdf.iter_mut().for_each(|v| *v /= total);
        cdf[n - 1] = 1.0;
        let slopes = monotone_slopes(&cdf, &knots);
        Ok(RadialSampler { snr, nt, knots, cdf, slopes })
    }

    /// Shared instance for `(snr, nt)`, built on first use.
    pub fn cached(snr: f64, nt: u32) -> Result<Arc<RadialSampler>> {
        type Cache = Mutex<HashMap<(u64, u32), Arc<RadialSampler>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (snr.to_bits(), nt);
        if let Some(s) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(s.clone());
        }
        let built = Arc::new(RadialSampler::new(snr, nt)?);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard.entry(key).or_insert(built).clone())
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn nt(&self) -> u32 {
        self.nt
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    /// Radius at CDF level `u ∈ [0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = match self.cdf.partition_point(|&c| c <= u) {
            0 => 0,
            k if k >= self.cdf.len() => self.cdf.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.cdf[i], self.cdf[i + 1]);
        let (y0, y1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        if h <= 0.0 {
            return y0;
        }
        let s = (u - x0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (h00 * y0 + h10 * h * self.slopes[i] + h01 * y1 + h11 * h * self.slopes[i + 1]).clamp(y0, y1)
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random::<f64>())
    }

    /// Isotropic direction times a radius from the tabulated law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.nt as usize;
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = self.sample_radius(rng);
        v.iter_mut().for_each(|x| *x *= r / norm);
        v
    }
}

/// Fritsch–Carlson slopes for a monotone cubic through `(x_i, y_i)`.
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1)
        .map(|i| {
            let h = x[i + 1] - x[i];
            if h > 0.0 {
                (y[i + 1] - y[i]) / h
            } else {
                0.0
            }
        })
        .collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d[i];
        let b = m[i + 1] / d[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * d[i];
            m[i + 1] = tau * b * d[i];
        }
    }
    m
}

/// One draw from the capacity-achieving input law, deterministic in `seed`.
pub fn sample_optimal_coherent_input(snr: f64, nt: u32, seed: u64) -> Result<Vec<f64>> {
    let s = RadialSampler::cached(snr, nt)?;
    let mut r = rng::stream_rng(rng::derive_seed(seed, "coherent-input", 0), 0);
    Ok(s.sample(&mut r))
}

/// `n` draws, identical for any worker count.
pub fn sample_optimal_coherent_inputs(snr: f64, nt: u32, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let s = RadialSampler::cached(snr, nt)?;
    let seed = rng::derive_seed(seed, "coherent-input-batch", 0);
    let parts = rng::map_chunks(n, rng::CHUNK, seed, |r, range| range.map(|_| s.sample(r)).collect::<Vec<_>>());
    Ok(parts.into_iter().flatten().collect())
}

/// Radial density `p(r)` normalized on `[0, √snr]`, computed by adaptive
/// quadrature independently of the sampler's table.
pub fn radial_density(snr: f64, nt: u32) -> Result<impl Fn(f64) -> f64> {
    let ln_norm = ln_alpha_coherent(snr, nt)?;
    Ok(move |r: f64| (ln_alpha_integrand(r, nt) - ln_norm).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_at_origin() {
        assert!((zeta(0, 0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((zeta(2, 0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((zeta(0, 1e-6).unwrap() - 2.0 / PI).abs() < 1e-8);
        assert!((zeta(2, 1e-6).unwrap() - 2.0 / PI).abs() < 1e-8);
        assert!(zeta(1, 1.0).is_err());
        assert!(zeta(0, -1.0).is_err());
    }

    #[test]
    fn zeta_rules_agree_at_the_switch() {
        for k in [0, 2] {
            for t in [0.5, 0.9, 1.0, 1.1, 1.5] {
                let gh = zeta_hermite(k, t);
                let ad = zeta_substituted(k, t);
                assert!((gh / ad - 1.0).abs() < 1e-12, "k={k} t={t}: {gh} vs {ad}");
            }
        }
    }

    #[test]
    fn reference_zeta_values() {
        assert!((zeta0(1.0) - 0.480_538).abs() < 2e-6);
        assert!((zeta2(1.0) - 0.270_070).abs() < 2e-6);
        assert!((zeta0_derivative(1.0) + 0.210_468).abs() < 2e-6);
    }

    #[test]
    fn large_r_constants() {
        let (a0, a2) = a_constants();
        assert!((a0 - 0.720_647_169_5).abs() < 1e-9, "{a0}");
        assert!((a2 - 0.880_440_166_4).abs() < 1e-9, "{a2}");
        assert!((50.0 * zeta0(50.0) / a0 - 1.0).abs() < 0.005);
        assert!((50f64.powi(3) * zeta2(50.0) / a2 - 1.0).abs() < 0.005);
    }

    #[test]
    fn fisher_det_examples() {
        assert!((fisher_det_coherent(0.0, 1).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((fisher_det_coherent(0.0, 4).unwrap() - (2.0 / PI).powi(4)).abs() < 1e-15);
        for r in [0.3, 1.7, 12.0] {
            assert!((fisher_det_coherent(r, 1).unwrap() / zeta2(r) - 1.0).abs() < 1e-14);
        }
        // 10³ antennas must not underflow in the log domain.
        assert!(ln_fisher_det_coherent(3.0, 1000).is_finite());
    }

    #[test]
    fn alpha_low_snr() {
        let a = alpha_coherent(1e-4, 1).unwrap();
        assert!((a / (2.0 / PI * 1e-4).sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn capacity_terms_and_nr_scaling() {
        let p = CoherentParams::new(1.0, 2, 1024).unwrap();
        let c = capacity_coherent(&p).unwrap();
        let t = c.terms.unwrap();
        assert!((t.total() - c.bits_per_use).abs() < 1e-12);
        let c2 = capacity_coherent(&CoherentParams { nr: 2048, ..p }).unwrap();
        assert!((c2.bits_per_use - c.bits_per_use - 1.0).abs() < 1e-12);
        let c4 = capacity_coherent(&CoherentParams { nr: 4096, ..p }).unwrap();
        assert!((c4.bits_per_use - c.bits_per_use - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_examples() {
        let snr: f64 = 2.0;
        let nt = 3;
        let z = zeta0(snr.sqrt()).powi(2);
        assert!((fisher_det_spherical(&[0.0, 0.0], snr, nt).unwrap() / z - 1.0).abs() < 1e-14);
        let half = [1.0, 0.0];
        assert!((fisher_det_spherical(&half, snr, nt).unwrap() / (2.0 * z) - 1.0).abs() < 1e-14);
        assert!(fisher_det_spherical(&[1.5, 0.0], snr, nt).is_err());
        for nt in 2..7 {
            let closed = 0.5 * (snr * zeta0(snr.sqrt())).powf(0.5 * f64::from(nt - 1)) * scalar::area_sphere(nt);
            let quad = spherical_fisher_integral(snr, nt).unwrap();
            assert!((quad / closed - 1.0).abs() < 1e-10, "nt={nt}");
        }
    }

    #[test]
    fn sampler_table_is_a_cdf() {
        let s = RadialSampler::new(4.0, 3).unwrap();
        assert!(s.cdf_table().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.inverse_cdf(1.0), 2.0);
        assert_eq!(s.inverse_cdf(0.0), 0.0);
        let v = sample_optimal_coherent_input(4.0, 3, 1).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 2.0 + 1e-12);
    }
}
