//! Channel simulation and the empirical checks built on it.
//!
//! - [`simulate_block`] draws `Y = sign(HX + Z)` for one coherence block.
//! - [`estimate_q_hat`] is the plug-in estimator `q̂ = cos(π · disagreement rate)`.
//! - [`mi_exact_t2`] evaluates `I(μ; K)` for `T = 2` through the binomial
//!   disagreement count `K`, which is sufficient.
//! - [`mi_mc_t3`] is a nested Monte Carlo estimate of `I(q; N)` for `T = 3`
//!   with `N` the multinomial class counts.
//! - [`fisher_coherent_mc`] averages `ξ(hᵀx) h hᵀ` over Gaussian `h`.

use crate::covariance::{self, pair_count, pairs, CorrelationVector, InputMatrix, UniformQSampler};
use crate::error::{Error, Result};
use crate::orthant::{mu_t3_values, pattern_index, OutcomeDistribution};
use crate::rng::{self, Moments};
use crate::scalar::{eta, ln_gamma, xi};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

// ---------------------------------------------------------------------------
// Channel blocks
// ---------------------------------------------------------------------------

/// One coherence block: input `X` (`n_t × T`) and signs `Y` (`n_r × T`,
/// row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlock {
    pub x: InputMatrix,
    y: Vec<i8>,
    nr: usize,
    pub seed: u64,
    /// Largest column energy `max_i ‖x_i‖²`.
    pub snr: f64,
}

impl ChannelBlock {
    /// Block from an explicit sign matrix, for replay and tests.
    pub fn from_signs(x: InputMatrix, y: Vec<i8>, seed: u64) -> Result<Self> {
        let t = x.t();
        if y.len() % t != 0 || y.is_empty() {
            return Err(Error::invalid("sign matrix size is not a multiple of T"));
        }
        if y.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("sign entries must be +1 or -1"));
        }
        let snr = x.column_norms().iter().fold(0.0f64, |m, n| m.max(n * n));
        Ok(ChannelBlock { nr: y.len() / t, x, y, seed, snr })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn t(&self) -> usize {
        self.x.t()
    }

    pub fn signs(&self) -> &[i8] {
        &self.y
    }

    pub fn row(&self, k: usize) -> &[i8] {
        let t = self.t();
        &self.y[k * t..(k + 1) * t]
    }

    /// Fraction of receive antennas where columns `i` and `j` disagree.
    pub fn disagreement(&self, i: usize, j: usize) -> f64 {
        let t = self.t();
        let d = self.y.chunks_exact(t).filter(|r| r[i] != r[j]).count();
        d as f64 / self.nr as f64
    }
}

/// `Y = sign(HX + Z)` with i.i.d. standard normal `H` (`n_r × n_t`) and `Z`.
/// Each receive antenna is drawn independently; `sign(0) = +1`.
pub fn simulate_block(x: &InputMatrix, nr: usize, seed: u64) -> Result<ChannelBlock> {
    if nr == 0 {
        return Err(Error::invalid("nr must be at least 1"));
    }
    let (nt, t) = (x.nt(), x.t());
    let m = x.matrix();
    let xf: Vec<f64> = (0..nt * t).map(|k| m[(k / t, k % t)]).collect();
    let stream = rng::derive_seed(seed, "simulate-block", 0);
    let parts = rng::map_chunks(nr, rng::CHUNK, stream, |r, range| {
        let mut out = Vec::with_capacity(range.len() * t);
        let mut h = vec![0.0; nt];
        for _ in range {
            for v in h.iter_mut() {
                *v = r.sample(StandardNormal);
            }
            for j in 0..t {
                let mut s: f64 = r.sample(StandardNormal);
                for p in 0..nt {
                    s += h[p] * xf[p * t + j];
                }
                out.push(if s < 0.0 { -1 } else { 1 });
            }
        }
        out
    });
    ChannelBlock::from_signs(x.clone(), parts.concat(), seed)
}

/// `q̂_{ij} = cos(π · (1/n_r) Σ_k 1(Y_{ki} ≠ Y_{kj}))`, in `[−1, 1]`.
pub fn estimate_q_hat(block: &ChannelBlock) -> CorrelationVector {
    let t = block.t();
    let entries = pairs(t).into_iter().map(|(i, j)| (PI * block.disagreement(i, j)).cos()).collect();
    CorrelationVector::from_raw(t, entries)
}

// ---------------------------------------------------------------------------
// Estimator MSE
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub nr: usize,
    /// 0-based pair `(i, j)`.
    pub pair: (usize, usize),
    pub mse: f64,
    /// `π²/n_r`.
    pub bound: f64,
    /// `π²/n_r · (1 + 5/√trials)`.
    pub bound_with_slack: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseTable {
    pub t: usize,
    pub gamma: f64,
    pub trials: usize,
    pub rows: Vec<MseRow>,
}

impl MseTable {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.within_bound)
    }

    pub fn mean_mse(&self, nr: usize) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.nr == nr).map(|r| r.mse).collect();
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Empirical `E|q̂_i − q_i|²` with `q` uniform on `Q_γ` (a fresh `q` per
/// trial) and the channel simulated at the `X` of [`covariance::input_from_q`].
/// `γ = 0` means zero input.
pub fn estimator_mse_sweep(t: usize, gamma: f64, nr_list: &[usize], trials: usize, seed: u64) -> Result<MseTable> {
    if trials < 100 {
        return Err(Error::invalid("estimator_mse_sweep needs at least 100 trials"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1) (gamma = {gamma})")));
    }
    if t < 2 {
        return Err(Error::invalid("T must be at least 2"));
    }
    let m = pair_count(t);
    let slack = 1.0 + 5.0 / (trials as f64).sqrt();
    let mut rows = Vec::new();
    for (ni, &nr) in nr_list.iter().enumerate() {
        if nr == 0 {
            return Err(Error::invalid("nr values must be positive"));
        }
        let errs: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|k| -> Result<Vec<f64>> {
                let ts = rng::derive_seed(seed, "mse-trial", (ni * trials + k) as u64);
                let (q, x) = if gamma == 0.0 {
                    (vec![0.0; m], InputMatrix::zeros(t, t))
                } else {
                    let mut s = UniformQSampler::new(t, gamma)?;
                    let q = s.sample(&mut rng::stream_rng(ts, 0));
                    let x = covariance::input_from_q(&q, gamma / (1.0 - gamma))?;
                    (q.into_entries(), x)
                };
                let block = simulate_block(&x, nr, ts)?;
                let qh = estimate_q_hat(&block);
                Ok(q.iter().zip(qh.entries()).map(|(a, b)| (a - b) * (a - b)).collect())
            })
            .collect::<Result<_>>()?;
        let bound = PI * PI / nr as f64;
        for (p, pair) in pairs(t).into_iter().enumerate() {
            let mse = errs.iter().map(|e| e[p]).sum::<f64>() / trials as f64;
            rows.push(MseRow {
                nr,
                pair,
                mse,
                bound,
                bound_with_slack: bound * slack,
                within_bound: mse <= bound * slack,
            });
        }
    }
    Ok(MseTable { t, gamma, trials, rows })
}

// ---------------------------------------------------------------------------
// Exact mutual information for T = 2
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prior {
    /// Truncated arcsine law `∝ (μ(1−μ))^{−1/2}` on `[μ_min, 1 − μ_min]`.
    Jeffreys,
    /// `q` uniform on `[−γ, γ]`, i.e. `∝ sin(πμ)` on `[μ_min, 1 − μ_min]`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiT2 {
    /// `I(μ; K)` in bits per block of two channel uses.
    pub bits: f64,
    /// Evidence `p(K)`, `K = 0..=n_r`.
    pub evidence: Vec<f64>,
    pub nodes: usize,
}

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_27,
    0.222_381_034_453_374_48,
    0.101_228_536_290_376_26,
];

/// Nodes `μ_j` and normalized prior weights on `[μ_min, 1 − μ_min]`.
///
/// The integration variable is `θ` with `μ = sin²θ`, in which the Jeffreys
/// prior is flat and the binomial likelihood has a width of about
/// `1/(2√n_r)` everywhere; composite 8-point Gauss–Legendre panels resolve
/// it with two panels per width unless `quad_points` overrides the count.
fn prior_nodes(nr: usize, gamma: f64, prior: Prior, quad_points: Option<usize>) -> (Vec<f64>, Vec<f64>) {
    let mu_min = gamma.acos() / PI;
    let a = mu_min.sqrt().asin();
    let b = PI / 2.0 - a;
    let panels = match quad_points {
        Some(n) => n.div_ceil(8).max(1),
        None => (((b - a) * 4.0 * (nr as f64).sqrt()).ceil() as usize).max(16),
    };
    let h = (b - a) / panels as f64;
    let mut mu = Vec::with_capacity(panels * 8);
    let mut w = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for k in 0..4 {
            for s in [-1.0, 1.0] {
                let th = c + s * 0.5 * h * GL8_X[k];
                let m = th.sin().powi(2);
                let dens = match prior {
                    Prior::Jeffreys => 1.0,
                    // dμ/dθ = sin 2θ, prior ∝ sin(πμ)
                    Prior::Uniform => (PI * m).sin() * (2.0 * th).sin(),
                };
                mu.push(m);
                w.push(0.5 * h * GL8_W[k] * dens);
            }
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    (mu, w)
}

/// `I(μ1; K)` for `T = 2`, `K ~ Binomial(n_r, μ1)` the number of receive
/// antennas whose two signs disagree, `μ1` drawn from `prior`. Returns bits
/// per block.
pub fn mi_exact_t2(nr: usize, gamma: f64, prior: Prior, quad_points: Option<usize>) -> Result<f64> {
    Ok(mi_exact_t2_detail(nr, gamma, prior, quad_points)?.bits)
}

pub fn mi_exact_t2_detail(nr: usize, gamma: f64, prior: Prior, quad_points: Option<usize>) -> Result<MiT2> {
    if nr == 0 || nr > 1 << 20 {
        return Err(Error::invalid(format!("nr must lie in 1..=2^20 (nr = {nr})")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1) (gamma = {gamma})")));
    }
    if gamma == 0.0 {
        let mut ev = vec![0.0; nr + 1];
        let lc = ln_choose_table(nr);
        for (k, e) in ev.iter_mut().enumerate() {
            *e = (lc[k] - nr as f64 * LN_2).exp();
        }
        return Ok(MiT2 { bits: 0.0, evidence: ev, nodes: 0 });
    }
    let (mu, w) = prior_nodes(nr, gamma, prior, quad_points);
    let lc = ln_choose_table(nr);
    let n = nr as f64;
    const BLOCK: usize = 64;
    let parts: Vec<(Vec<f64>, f64)> = mu
        .par_chunks(BLOCK)
        .zip(w.par_chunks(BLOCK))
        .map(|(ms, ws)| {
            let mut ev = vec![0.0; nr + 1];
            let mut cond_h = 0.0;
            for (&m, &wt) in ms.iter().zip(ws) {
                let (lm, l1m) = (m.ln(), (-m).ln_1p());
                let sd = (n * m * (1.0 - m)).sqrt();
                let lo = ((n * m - 40.0 * sd - 40.0).floor().max(0.0)) as usize;
                let hi = ((n * m + 40.0 * sd + 40.0).ceil().min(n)) as usize;
                let mut h = 0.0;
                for k in lo..=hi {
                    let lp = lc[k] + k as f64 * lm + (n - k as f64) * l1m;
                    let p = lp.exp();
                    ev[k] += wt * p;
                    h -= p * lp;
                }
                cond_h += wt * h;
            }
            (ev, cond_h)
        })
        .collect();
    let mut evidence = vec![0.0; nr + 1];
    let mut cond_h = 0.0;
    for (ev, h) in parts {
        evidence.iter_mut().zip(ev).for_each(|(a, b)| *a += b);
        cond_h += h;
    }
    let marg_h: f64 = evidence.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
    Ok(MiT2 { bits: (marg_h - cond_h) / LN_2, evidence, nodes: mu.len() })
}

/// `ln C(n, k)` for `k = 0..=n`.
fn ln_choose_table(n: usize) -> Vec<f64> {
    let lf = ln_gamma(n as f64 + 1.0);
    (0..=n).map(|k| lf - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).collect()
}

// ---------------------------------------------------------------------------
// Nested Monte Carlo mutual information for T = 3
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// `I(q; N)` in bits per block of three channel uses.
    pub estimate: f64,
    pub std_err: f64,
    /// `estimate(n_inner) − estimate(2 n_inner)`.
    pub bias_diag: f64,
    pub n_outer: usize,
    pub n_inner: usize,
}

/// `I(q; N)` for `T = 3` with `q` uniform on `Q_γ` and `N ~ Multinomial(n_r, μ(q))`
/// the class counts. Each outer draw estimates the evidence `p(N)` from
/// `n_inner` fresh prior draws (log-sum-exp); the same outer draws are
/// re-scored with `2 n_inner` inner draws for the bias diagnostic.
pub fn mi_mc_t3(nr: usize, gamma: f64, n_outer: usize, n_inner: usize, seed: u64) -> Result<MiEstimate> {
    if nr == 0 {
        return Err(Error::invalid("nr must be at least 1"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1) (gamma = {gamma})")));
    }
    if n_outer < 2 || n_inner < 1 {
        return Err(Error::invalid("mi_mc_t3 needs n_outer >= 2 and n_inner >= 1"));
    }
    if gamma == 0.0 {
        return Ok(MiEstimate { estimate: 0.0, std_err: 0.0, bias_diag: 0.0, n_outer, n_inner });
    }
    let stream = rng::derive_seed(seed, "mi-mc-t3", 0);
    let parts = rng::map_chunks(n_outer, 16, stream, |r, range| {
        let mut sampler = UniformQSampler::new(3, gamma).expect("gamma checked");
        let mut q = [0.0; 3];
        let mut short = Moments::default();
        let mut long = Moments::default();
        let mut scores = vec![0.0; 2 * n_inner];
        for _ in range {
            sampler.fill(r, &mut q);
            let mu = mu_t3_values(&q);
            let counts = multinomial4(r, nr, &mu);
            let ll = log_lik(&counts, &mu);
            for s in scores.iter_mut() {
                sampler.fill(r, &mut q);
                *s = log_lik(&counts, &mu_t3_values(&q));
            }
            let ev_short = log_mean_exp(&scores[..n_inner]);
            let ev_long = log_mean_exp(&scores);
            short.push((ll - ev_short) / LN_2);
            long.push((ll - ev_long) / LN_2);
        }
        (short, long)
    });
    let (short, long) = parts
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
    Ok(MiEstimate {
        estimate: short.mean(),
        std_err: short.std_err(),
        bias_diag: short.mean() - long.mean(),
        n_outer,
        n_inner,
    })
}

fn log_lik(counts: &[u64; 4], mu: &[f64; 4]) -> f64 {
    counts
        .iter()
        .zip(mu)
        .map(|(&c, &m)| if c == 0 { 0.0 } else { c as f64 * m.max(1e-300).ln() })
        .sum()
}

fn log_mean_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + (v.iter().map(|x| (x - m).exp()).sum::<f64>() / v.len() as f64).ln()
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial4<R: Rng + ?Sized>(r: &mut R, n: usize, mu: &[f64; 4]) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut left = n as u64;
    let mut mass = 1.0;
    for c in 0..3 {
        if left == 0 {
            break;
        }
        let p = if mass > 0.0 { (mu[c].max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, p).map(|b| b.sample(r)).unwrap_or(0);
        out[c] = k;
        left -= k;
        mass -= mu[c].max(0.0);
    }
    out[3] = left;
    out
}

// ---------------------------------------------------------------------------
// Coherent Fisher matrix
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FisherMc {
    pub matrix: DMatrix<f64>,
    /// Entrywise standard errors.
    pub std_err: DMatrix<f64>,
    pub samples: usize,
}

/// `E_h[ξ(hᵀx) h hᵀ]`, `h ~ N(0, I)`, by Monte Carlo. The upper triangle is
/// accumulated and mirrored, so the result is exactly symmetric.
pub fn fisher_coherent_mc(x: &[f64], n_samples: usize, seed: u64) -> Result<FisherMc> {
    let n = x.len();
    if n == 0 {
        return Err(Error::invalid("x must be non-empty"));
    }
    if n_samples < 2 {
        return Err(Error::invalid("fisher_coherent_mc needs at least 2 samples"));
    }
    let m = n * (n + 1) / 2;
    let stream = rng::derive_seed(seed, "fisher-coherent-mc", n as u64);
    let parts = rng::map_chunks(n_samples, rng::CHUNK, stream, |r, range| {
        let mut acc = vec![Moments::default(); m];
        let mut h = vec![0.0; n];
        for _ in range {
            let mut s = 0.0;
            for (hv, xv) in h.iter_mut().zip(x) {
                *hv = r.sample(StandardNormal);
                s += *hv * xv;
            }
            let w = xi(s);
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    acc[k].push(w * h[i] * h[j]);
                    k += 1;
                }
            }
        }
        acc
    });
    let mut tot = vec![Moments::default(); m];
    for p in parts {
        tot.iter_mut().zip(p).for_each(|(a, b)| *a = a.merge(b));
    }
    let mut matrix = DMatrix::zeros(n, n);
    let mut std_err = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            matrix[(i, j)] = tot[k].mean();
            matrix[(j, i)] = tot[k].mean();
            std_err[(i, j)] = tot[k].std_err();
            std_err[(j, i)] = tot[k].std_err();
            k += 1;
        }
    }
    Ok(FisherMc { matrix, std_err, samples: n_samples })
}

// ---------------------------------------------------------------------------
// Pair statistics
// ---------------------------------------------------------------------------

/// Empirical pmf of the sign patterns in a block, indexed as in
/// [`crate::orthant`].
pub fn empirical_pmf(block: &ChannelBlock) -> Result<OutcomeDistribution> {
    let t = block.t();
    let mut counts = vec![0u64; 1 << t];
    for row in block.signs().chunks_exact(t) {
        counts[pattern_index(row, t)?] += 1;
    }
    OutcomeDistribution::new(t, counts.into_iter().map(|c| c as f64 / block.nr() as f64).collect())
}

/// Expected disagreement rate `η(ρ_{ij}(X))` per pair.
pub fn expected_disagreement(x: &InputMatrix) -> Result<BTreeMap<(usize, usize), f64>> {
    let rho = covariance::rho_of_x(x)?;
    pairs(x.t())
        .into_iter()
        .zip(rho.entries())
        .map(|(p, &q)| Ok((p, eta(q)?)))
        .collect()
}

/// Draws `μ1` from the truncated arcsine law on `[μ_min, 1 − μ_min]` by
/// inverse CDF: `μ = sin²θ` with `θ` uniform.
pub fn sample_jeffreys_t2(gamma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1) (gamma = {gamma})")));
    }
    let a = (gamma.acos() / PI).sqrt().asin();
    let b = PI / 2.0 - a;
    let stream = rng::derive_seed(seed, "jeffreys-t2", 0);
    let parts = rng::map_chunks(n, rng::CHUNK, stream, |r, range| {
        range.map(|_| (a + (b - a) * r.random::<f64>()).sin().powi(2)).collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Everything needed to recompute a result, plus a digest of what was
/// produced. The id hashes only the inputs, so reruns share it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub operation: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub samples: Option<u64>,
    pub tool_version: String,
    /// Seconds spent computing.
    pub wall_clock: f64,
    /// SHA-256 of the emitted output bytes.
    pub outputs_digest: String,
}

impl RunManifest {
    pub fn new(operation: &str, params: BTreeMap<String, serde_json::Value>, seed: u64, samples: Option<u64>) -> Self {
        RunManifest {
            operation: operation.to_string(),
            params,
            seed,
            samples,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock: 0.0,
            outputs_digest: String::new(),
        }
    }

    /// Hex SHA-256 over the canonical JSON of the inputs.
    pub fn id(&self) -> String {
        let inputs = serde_json::json!({
            "operation": self.operation,
            "params": self.params,
            "seed": self.seed,
            "samples": self.samples,
            "tool_version": self.tool_version,
        });
        sha256_hex(inputs.to_string().as_bytes())
    }

    pub fn record_outputs(&mut self, bytes: &[u8], wall_clock: f64) {
        self.outputs_digest = sha256_hex(bytes);
        self.wall_clock = wall_clock;
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
