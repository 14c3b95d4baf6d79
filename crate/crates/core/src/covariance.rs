//! The non-coherent parameter space.
//!
//! A block of `T` channel uses with a Gaussian channel `H` produces, after
//! normalization, an output covariance `Σ(q) = I + Σ̃(q)` whose off-diagonal
//! entries form the correlation vector `q`. Inputs with column norms at most
//! `√snr` reach exactly the set
//!
//! ```text
//! Q_γ = { q : Σ(q) ⪰ (1 − γ) I },   γ = snr / (1 + snr),
//! ```
//!
//! which is the scaled copy `γ·Q_1` of the elliptope of `T×T` correlation
//! matrices. This module builds `Σ(q)`, tests membership, maps inputs to `q`
//! and back, and measures and samples `Q_γ`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, McEstimate, Moments};
use crate::scalar::ln_gamma;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2, PI};

/// Eigenvalue slack in the membership test.
pub const PSD_TOL: f64 = 1e-10;
/// Diagonal jitter ladder used to factor boundary points of `Q_γ`.
const JITTER: [f64; 4] = [0.0, 1e-12, 1e-11, 1e-10];

// ---------------------------------------------------------------------------
// Pair indexing
// ---------------------------------------------------------------------------

/// Number of unordered pairs, `T(T−1)/2`.
pub fn pair_count(t: usize) -> usize {
    t * t.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` (0-based, `i ≠ j`) in lexicographic order.
pub fn pair_index(t: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(j < t && i != j);
    i * (2 * t - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(t: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(pair_count(t));
    for i in 0..t {
        for j in i + 1..t {
            v.push((i, j));
        }
    }
    v
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Pairwise correlations `q_{ij}`, `i < j`, in lexicographic pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationVector {
    t: usize,
    entries: Vec<f64>,
}

impl CorrelationVector {
    pub fn new(t: usize, entries: Vec<f64>) -> Result<Self> {
        if t < 2 {
            return Err(Error::invalid(format!("T must be at least 2 (T = {t})")));
        }
        if entries.len() != pair_count(t) {
            return Err(Error::invalid(format!(
                "T = {t} needs {} correlations, got {}",
                pair_count(t),
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !(e.abs() <= 1.0)) {
            return Err(Error::invalid(format!("correlation {bad} outside [-1, 1]")));
        }
        Ok(CorrelationVector { t, entries })
    }

    pub fn zeros(t: usize) -> Result<Self> {
        Self::new(t, vec![0.0; pair_count(t)])
    }

    /// Every pair set to the same value.
    pub fn constant(t: usize, value: f64) -> Result<Self> {
        Self::new(t, vec![value; pair_count(t)])
    }

    pub(crate) fn from_raw(t: usize, entries: Vec<f64>) -> Self {
        CorrelationVector { t, entries }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[pair_index(self.t, i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Vec<f64> {
        self.entries.iter().map(|e| e * factor).collect()
    }
}

/// Symmetric `T×T` matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn t(&self) -> usize {
        self.m.nrows()
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        pairs(self.t()).into_iter().map(|(i, j)| self.m[(i, j)]).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.m)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }
}

/// Transmit matrix `X` of size `n_t × T`; column `i` is the signal sent at
/// time `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMatrix {
    x: DMatrix<f64>,
}

impl InputMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.ncols() < 1 || x.nrows() < 1 {
            return Err(Error::invalid("input matrix must be non-empty"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("input matrix has non-finite entries"));
        }
        Ok(InputMatrix { x })
    }

    pub fn zeros(nt: usize, t: usize) -> Self {
        InputMatrix { x: DMatrix::zeros(nt, t) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn nt(&self) -> usize {
        self.x.nrows()
    }

    pub fn t(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.t()).map(|j| self.x.column(j).norm()).collect()
    }

    /// Square upper-triangular with non-negative diagonal and all column
    /// norms equal to `√snr`, up to `tol`.
    pub fn is_normalized_triangular(&self, snr: f64, tol: f64) -> bool {
        let (r, c) = self.x.shape();
        let lower_zero = (0..r).all(|i| (0..c.min(i)).all(|j| self.x[(i, j)].abs() <= tol));
        let diag_ok = (0..r.min(c)).all(|i| self.x[(i, i)] >= -tol);
        let s = snr.sqrt();
        let norms_ok = self.column_norms().iter().all(|n| (n - s).abs() <= tol * s.max(1.0));
        lower_zero && diag_ok && norms_ok
    }
}

/// `snr` together with `γ = snr/(1+snr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrContext {
    pub snr: f64,
    pub gamma: f64,
}

impl SnrContext {
    pub fn new(snr: f64) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::invalid(format!("snr must be positive and finite (snr = {snr})")));
        }
        Ok(SnrContext { snr, gamma: snr / (1.0 + snr) })
    }

    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1) (gamma = {gamma})")));
        }
        Ok(SnrContext { snr: gamma / (1.0 - gamma), gamma })
    }
}

pub(crate) fn check_gamma(gamma: f64, allow_one: bool) -> Result<()> {
    let ok = gamma > 0.0 && (gamma < 1.0 || (allow_one && gamma == 1.0));
    if ok {
        Ok(())
    } else {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        Err(Error::invalid(format!("gamma must lie in {range} (gamma = {gamma})")))
    }
}

// ---------------------------------------------------------------------------
// Σ(q) and membership
// ---------------------------------------------------------------------------

fn sigma_raw(t: usize, q: &[f64], scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(t, t);
    for (k, (i, j)) in pairs(t).into_iter().enumerate() {
        m[(i, j)] = q[k] * scale;
        m[(j, i)] = q[k] * scale;
    }
    m
}

/// `Σ(q) = I + Σ̃(q)`.
pub fn sigma_of_q(q: &CorrelationVector) -> CovarianceMatrix {
    CovarianceMatrix { m: sigma_raw(q.t, &q.entries, 1.0) }
}

/// Membership in `Q_γ` via the smallest eigenvalue of `Σ(q)`.
pub fn is_member_eigen(q: &CorrelationVector, gamma: f64) -> bool {
    linalg::min_eigenvalue(&sigma_raw(q.t, &q.entries, 1.0)) >= (1.0 - gamma) - PSD_TOL
}

/// Membership in `Q_γ` via a Cholesky attempt on `Σ(q/γ)`, shifted by the
/// same eigenvalue slack as [`is_member_eigen`].
pub fn is_member_cholesky(q: &CorrelationVector, gamma: f64) -> bool {
    let t = q.t;
    let mut buf = vec![0.0; t * t];
    psd_shifted(&q.entries, t, gamma, &mut buf)
}

/// `q ∈ Q_γ`. Accepts `γ ∈ (0, 1]`.
pub fn is_member(q: &CorrelationVector, gamma: f64) -> bool {
    gamma > 0.0 && gamma <= 1.0 && is_member_eigen(q, gamma)
}

/// Cholesky test of `Σ(q/γ) + (PSD_TOL/γ) I` in a caller-owned buffer.
pub(crate) fn psd_shifted(q: &[f64], t: usize, gamma: f64, buf: &mut [f64]) -> bool {
    let inv = 1.0 / gamma;
    let shift = PSD_TOL * inv;
    let mut k = 0;
    for i in 0..t {
        buf[i * t + i] = 1.0 + shift;
        for j in i + 1..t {
            buf[i * t + j] = q[k] * inv;
            buf[j * t + i] = q[k] * inv;
            k += 1;
        }
    }
    linalg::cholesky_upper_in_place(buf, t)
}

// ---------------------------------------------------------------------------
// Inputs and correlations
// ---------------------------------------------------------------------------

/// `ρ_{ij}(X) = x_iᵀx_j / √((1+‖x_i‖²)(1+‖x_j‖²))`.
pub fn rho_of_x(x: &InputMatrix) -> Result<CorrelationVector> {
    let t = x.t();
    if t < 2 {
        return Err(Error::invalid("rho needs at least two columns"));
    }
    let m = x.matrix();
    let gram = m.transpose() * m;
    let entries = pairs(t)
        .into_iter()
        .map(|(i, j)| gram[(i, j)] / ((1.0 + gram[(i, i)]) * (1.0 + gram[(j, j)])).sqrt())
        .collect();
    Ok(CorrelationVector::from_raw(t, entries))
}

/// The input `√snr · Chol(Σ(q/γ))` reaching `q`, with `Chol` the upper
/// factor `R` of `RᵀR`. Boundary points are factored with a small diagonal
/// jitter and the columns renormalized.
pub fn input_from_q(q: &CorrelationVector, snr: f64) -> Result<InputMatrix> {
    let ctx = SnrContext::new(snr)?;
    if !is_member(q, ctx.gamma) {
        return Err(Error::Factorization(format!(
            "q is outside Q_gamma for gamma = {}",
            ctx.gamma
        )));
    }
    let mut r = cholesky_jittered(&sigma_raw(q.t, &q.entries, 1.0 / ctx.gamma))?;
    let s = snr.sqrt();
    for j in 0..q.t {
        let n = r.column(j).norm();
        r.column_mut(j).scale_mut(s / n);
    }
    InputMatrix::new(r)
}

/// Upper Cholesky factor of `m`, retrying with the diagonal jitter ladder
/// for matrices on the PSD boundary.
pub(crate) fn cholesky_jittered(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    for eps in JITTER {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += eps;
        }
        if let Some(r) = linalg::cholesky_upper(&a) {
            return Ok(r);
        }
    }
    Err(Error::Factorization(
        "matrix is not positive semidefinite within the jitter ladder".into(),
    ))
}

// ---------------------------------------------------------------------------
// Volumes
// ---------------------------------------------------------------------------

/// `ln Vol(Q_γ)` in closed form.
pub fn ln_vol_q_exact(t: usize, gamma: f64) -> Result<f64> {
    if t < 2 {
        return Err(Error::invalid(format!("T must be at least 2 (T = {t})")));
    }
    check_gamma(gamma, true)?;
    let tf = t as f64;
    let m = pair_count(t) as f64;
    let mut s = 0.5 * (m + 1.0) * PI.ln() + ln_gamma(tf) - (tf - 1.0) * LN_2
        - tf * ln_gamma(0.5 * (tf + 1.0));
    for j in 2..t {
        s += ln_gamma(0.5 * j as f64);
    }
    Ok(s + m * gamma.ln())
}

/// `Vol(Q_γ) = γ^{T(T−1)/2} Vol(Q_1)`.
pub fn vol_q_exact(t: usize, gamma: f64) -> Result<f64> {
    Ok(ln_vol_q_exact(t, gamma)?.exp())
}

pub fn log2_vol_q_exact(t: usize, gamma: f64) -> Result<f64> {
    Ok(ln_vol_q_exact(t, gamma)? / LN_2)
}

/// Rejection estimate of `Vol(Q_γ)` from uniform points of `[−γ, γ]^{T(T−1)/2}`.
pub fn vol_q_mc(t: usize, gamma: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if t < 2 {
        return Err(Error::invalid(format!("T must be at least 2 (T = {t})")));
    }
    check_gamma(gamma, true)?;
    if n_samples < 1000 {
        return Err(Error::invalid("vol_q_mc needs at least 1000 samples"));
    }
    let m = pair_count(t);
    let seed = rng::derive_seed(seed, "vol-q-mc", t as u64);
    let parts = rng::map_chunks(n_samples, rng::CHUNK, seed, |r, range| {
        let mut q = vec![0.0; m];
        let mut buf = vec![0.0; t * t];
        let mut acc = Moments::default();
        for _ in range {
            for v in q.iter_mut() {
                *v = r.random_range(-gamma..gamma);
            }
            acc.push(if psd_shifted(&q, t, gamma, &mut buf) { 1.0 } else { 0.0 });
        }
        acc
    });
    let rate = rng::merge_moments(parts);
    let cube = (2.0 * gamma).powi(m as i32);
    Ok(McEstimate::from_moments(&rate).scaled(cube))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumePrecision {
    /// Leading `T²` and `T` terms only.
    Coarse,
    /// Expansion through the constant term, exact up to `o(1)`.
    Fine,
}

/// Large-`T` expansion of `log2 Vol(Q_1)`.
///
/// Coarse: `T·[(T−1)/4 log2(2π√e/T) − log2(e)/8]`.
/// Fine adds `−(1/24) log2 T + log2(e)/8 + 1/4 − (1/2) log2 A`, with `A` the
/// Glaisher–Kinkelin constant; these come from the Barnes G-function
/// expansion of the Gamma products in the closed form.
pub fn log_vol_q_asymptotic(t: usize, precision: VolumePrecision) -> f64 {
    let tf = t as f64;
    let log2e = std::f64::consts::LOG2_E;
    let coarse = tf * ((tf - 1.0) / 4.0 * (2.0 * PI * E.sqrt() / tf).log2() - log2e / 8.0);
    match precision {
        VolumePrecision::Coarse => coarse,
        VolumePrecision::Fine => {
            coarse - tf.log2() / 24.0 + log2e / 8.0 + 0.25 - 0.5 * crate::scalar::GLAISHER.log2()
        }
    }
}

// ---------------------------------------------------------------------------
// Uniform sampling
// ---------------------------------------------------------------------------

/// Fills `q` with a uniform point of `Q_γ`.
///
/// Column `j` of a unit-column upper-triangular `U` takes its first `j`
/// entries from the first `j` coordinates of a uniform point on the sphere
/// in `R^{T+1}`, whose marginal density on the `j`-ball is
/// `∝ (1 − ‖r‖²)^{(T−j−1)/2}`; the diagonal entry completes the unit norm.
/// Then `q_{ij} = γ u_iᵀu_j`.
pub(crate) fn fill_uniform_q<R: Rng + ?Sized>(
    rng: &mut R,
    t: usize,
    gamma: f64,
    q: &mut [f64],
    u: &mut [f64],
    g: &mut [f64],
) {
    // u is row-major t×t, column j stored in u[k*t + j].
    u.iter_mut().for_each(|v| *v = 0.0);
    u[0] = 1.0;
    for j in 1..t {
        let mut norm2 = 0.0;
        for v in g.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm2 += *v * *v;
        }
        let inv = norm2.sqrt().recip();
        let mut head = 0.0;
        for k in 0..j {
            let r = g[k] * inv;
            u[k * t + j] = r;
            head += r * r;
        }
        u[j * t + j] = (1.0 - head).max(0.0).sqrt();
    }
    let mut idx = 0;
    for i in 0..t {
        for j in i + 1..t {
            let mut dot = 0.0;
            for k in 0..=i {
                dot += u[k * t + i] * u[k * t + j];
            }
            q[idx] = gamma * dot;
            idx += 1;
        }
    }
}

/// Reusable buffers for repeated uniform draws from `Q_γ`.
pub struct UniformQSampler {
    t: usize,
    gamma: f64,
    u: Vec<f64>,
    g: Vec<f64>,
}

impl UniformQSampler {
    pub fn new(t: usize, gamma: f64) -> Result<Self> {
        if t < 2 {
            return Err(Error::invalid(format!("T must be at least 2 (T = {t})")));
        }
        check_gamma(gamma, true)?;
        Ok(UniformQSampler { t, gamma, u: vec![0.0; t * t], g: vec![0.0; t + 1] })
    }

    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, q: &mut [f64]) {
        fill_uniform_q(rng, self.t, self.gamma, q, &mut self.u, &mut self.g);
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> CorrelationVector {
        let mut q = vec![0.0; pair_count(self.t)];
        self.fill(rng, &mut q);
        CorrelationVector::from_raw(self.t, q)
    }
}

/// One uniform draw from `Q_γ`, deterministic in `seed`.
pub fn sample_uniform_q(t: usize, gamma: f64, seed: u64) -> Result<CorrelationVector> {
    let mut s = UniformQSampler::new(t, gamma)?;
    let mut r = rng::stream_rng(rng::derive_seed(seed, "uniform-q", 0), 0);
    Ok(s.sample(&mut r))
}

/// `n` uniform draws from `Q_γ`, identical for any worker count.
pub fn sample_uniform_q_batch(t: usize, gamma: f64, n: usize, seed: u64) -> Result<Vec<CorrelationVector>> {
    UniformQSampler::new(t, gamma)?;
    let seed = rng::derive_seed(seed, "uniform-q-batch", 0);
    let parts = rng::map_chunks(n, rng::CHUNK, seed, |r, range| {
        let mut s = UniformQSampler::new(t, gamma).expect("validated above");
        range.map(|_| s.sample(r)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}
