//! One-dimensional quadrature.
//!
//! Two rules cover every integral in the crate: Gauss–Hermite for
//! expectations over a standard normal variable, and globally adaptive
//! Gauss–Kronrod (7/15 points) for finite or infinite intervals. Infinite
//! ends are mapped onto a finite parameter interval before subdivision.

use crate::error::{Error, Result};
use std::collections::{BinaryHeap, HashMap};
use std::cmp::Ordering;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussHermite,
    AdaptiveInterval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub kind: QuadratureKind,
    /// Node count for Gauss–Hermite; for the adaptive rule, the cap on the
    /// number of 15-point panels.
    pub node_count: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes: usize) -> Self {
        QuadratureSpec {
            kind: QuadratureKind::GaussHermite,
            node_count: nodes,
            abs_tol: 0.0,
            rel_tol: 0.0,
        }
    }

    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            kind: QuadratureKind::AdaptiveInterval,
            node_count: 2000,
            abs_tol,
            rel_tol,
        }
    }

    pub fn with_budget(mut self, panels: usize) -> Self {
        self.node_count = panels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::invalid("node_count must be at least 2"));
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(Error::invalid("tolerances must be non-negative"));
        }
        if self.kind == QuadratureKind::AdaptiveInterval
            && self.abs_tol == 0.0
            && self.rel_tol == 0.0
        {
            return Err(Error::invalid(
                "adaptive quadrature needs a positive abs_tol or rel_tol",
            ));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::adaptive(1e-10, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `∫_a^b f(x) dx`; either end may be infinite.
    Interval(f64, f64),
    /// `E[f(S)]` with `S ~ N(0, 1)`.
    GaussianWeight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec, domain: Domain) -> Result<Integral> {
    spec.validate()?;
    match (spec.kind, domain) {
        (QuadratureKind::GaussHermite, Domain::GaussianWeight) => {
            let rule = gauss_hermite(spec.node_count);
            Ok(Integral {
                value: rule.expect(&f),
                error: f64::NAN,
                evaluations: spec.node_count,
            })
        }
        (QuadratureKind::GaussHermite, Domain::Interval(..)) => Err(Error::Unsupported(
            "Gauss-Hermite applies to the Gaussian weight only".into(),
        )),
        (QuadratureKind::AdaptiveInterval, Domain::Interval(a, b)) => {
            adaptive(&f, a, b, spec.abs_tol, spec.rel_tol, spec.node_count)
        }
        (QuadratureKind::AdaptiveInterval, Domain::GaussianWeight) => adaptive(
            &|x| f(x) * crate::scalar::gaussian_pdf(x),
            f64::NEG_INFINITY,
            f64::INFINITY,
            spec.abs_tol,
            spec.rel_tol,
            spec.node_count,
        ),
    }
}

// ---------------------------------------------------------------------------
// Gauss–Hermite
// ---------------------------------------------------------------------------

/// Nodes and weights for `E[f(S)]`, `S ~ N(0,1)`; weights sum to one.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Cached rule with `n` nodes.
pub fn gauss_hermite(n: usize) -> Arc<GaussHermite> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(build_gauss_hermite(n)))
        .clone()
}

/// Newton iteration on the orthonormal Hermite recurrence (weight `e^{-x²}`),
/// then rescaled to the standard normal weight.
fn build_gauss_hermite(n: usize) -> GaussHermite {
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut nodes: Vec<f64> = x.iter().map(|v| v * sqrt2).collect();
    let mut weights: Vec<f64> = w.iter().map(|v| v / sqrt_pi).collect();
    nodes.reverse();
    weights.reverse();
    GaussHermite { nodes, weights }
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    let (v, e) = kronrod15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 15;
    let mut panels = 1;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if panels >= max_panels {
            return Err(Error::NonConvergence {
                estimate: total,
                error: err,
                evaluations: evals,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel below floating-point resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        evals += 30;
        panels += 1;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Integral { value, error, evaluations: evals })
}

/// Globally adaptive G7K15 over `[a, b]`. Infinite ends use
/// `x = a + t/(1−t)` (half line) or `x = t/(1−t²)` (whole line).
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("integration bounds are NaN"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        let r = adaptive(f, b, a, abs_tol, rel_tol, max_panels)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_finite(f, a, b, abs_tol, rel_tol, max_panels),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, abs_tol, rel_tol, max_panels)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, abs_tol, rel_tol, max_panels)
        }
        (false, false) => {
            let g = |t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            };
            adaptive_finite(&g, -1.0, 1.0, abs_tol, rel_tol, max_panels)
        }
    }
}

/// Sum of adaptive integrals over consecutive breakpoints.
pub fn adaptive_pieces<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    let mut acc = Integral { value: 0.0, error: 0.0, evaluations: 0 };
    let share = abs_tol / (breaks.len().max(2) - 1) as f64;
    for w in breaks.windows(2) {
        let r = adaptive(f, w[0], w[1], share, rel_tol, max_panels)?;
        acc.value += r.value;
        acc.error += r.error;
        acc.evaluations += r.evaluations;
    }
    Ok(acc)
}
