//! Built-in validation suites: each check compares a measured quantity with
//! an independent expectation.

use crate::coherent;
use crate::covariance::{self, CorrelationVector, VolumePrecision};
use crate::noncoherent;
use crate::orthant;
use crate::rng;
use crate::simulator::{self, Prior};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::{E, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FisherCoherent,
    Volume,
    EstimatorMse,
    MiT2,
    Orthant,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::FisherCoherent => "fisher-coherent",
            Suite::Volume => "volume",
            Suite::EstimatorMse => "estimator-mse",
            Suite::MiT2 => "mi-t2",
            Suite::Orthant => "orthant",
            Suite::All => "all",
        }
    }
}

/// Overrides of the default grids; empty lists keep the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateParams {
    pub suite: Suite,
    #[serde(rename = "T", default)]
    pub t: Vec<usize>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub snr: Vec<f64>,
    #[serde(default)]
    pub nt: Vec<usize>,
    #[serde(default)]
    pub nr: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: Suite, name: String, measured: f64, expected: f64, tolerance: f64, pass: bool) -> Check {
    Check { suite: suite.name(), check: name, measured, expected, tolerance, pass }
}

fn or<T: Clone>(v: &[T], default: &[T]) -> Vec<T> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

fn failed(suite: Suite, name: &str, e: crate::Error) -> Check {
    check(suite, format!("{name}: {e}"), f64::NAN, f64::NAN, f64::NAN, false)
}

pub fn run_suite(p: &ValidateParams, samples: u64, seed: u64) -> Vec<Check> {
    let n = samples as usize;
    let seed_for = |s: Suite| rng::derive_seed(seed, s.name(), 0);
    match p.suite {
        Suite::FisherCoherent => fisher_coherent(p, n, seed_for(Suite::FisherCoherent)),
        Suite::Volume => volume(p, n, seed_for(Suite::Volume)),
        Suite::EstimatorMse => estimator_mse(p, seed_for(Suite::EstimatorMse)),
        Suite::MiT2 => mi_t2(p),
        Suite::Orthant => orthant_suite(p, n, seed_for(Suite::Orthant)),
        Suite::All => [Suite::FisherCoherent, Suite::Volume, Suite::EstimatorMse, Suite::MiT2, Suite::Orthant]
            .into_iter()
            .flat_map(|s| run_suite(&ValidateParams { suite: s, ..p.clone() }, samples, seed))
            .collect(),
    }
}

pub fn report_json(checks: &[Check]) -> Value {
    json!(checks
        .iter()
        .map(|c| json!({
            "suite": c.suite,
            "check": c.check,
            "measured": c.measured,
            "expected": c.expected,
            "tolerance": c.tolerance,
            "pass": c.pass,
        }))
        .collect::<Vec<_>>())
}

fn fisher_coherent(p: &ValidateParams, n: usize, seed: u64) -> Vec<Check> {
    let s = Suite::FisherCoherent;
    let nts = or(&p.nt, &[1, 2, 3]);
    let radii: Vec<f64> = if p.snr.is_empty() { vec![0.5, 2.0] } else { p.snr.iter().map(|v| v.sqrt()).collect() };
    let mut out = Vec::new();
    for (k, &nt) in nts.iter().enumerate() {
        for (l, &r) in radii.iter().enumerate() {
            let name = format!("det Fisher nt={nt} r={r}");
            let mut x = vec![0.0; nt];
            x[0] = r;
            let sd = rng::derive_seed(seed, "fisher", (k * radii.len() + l) as u64);
            let res = simulator::fisher_coherent_mc(&x, n, sd)
                .and_then(|f| Ok((f.matrix.determinant(), coherent::fisher_det_coherent(r, nt as u32)?)));
            match res {
                Ok((mc, exact)) => {
                    let rel = (mc - exact).abs() / exact;
                    out.push(check(s, name, mc, exact, 0.02, rel < 0.02));
                }
                Err(e) => out.push(failed(s, &name, e)),
            }
        }
    }
    out
}

fn volume(p: &ValidateParams, n: usize, seed: u64) -> Vec<Check> {
    let s = Suite::Volume;
    let mut out = Vec::new();
    for (t, want) in [(2, 2.0), (3, PI * PI / 2.0), (4, 32.0 * PI * PI / 27.0)] {
        let name = format!("Vol(Q_1) T={t} closed form");
        match covariance::vol_q_exact(t, 1.0) {
            Ok(v) => out.push(check(s, name, v, want, 1e-10, ((v - want) / want).abs() < 1e-10)),
            Err(e) => out.push(failed(s, &name, e)),
        }
    }
    let ts = or(&p.t, &[3, 4, 5]);
    let gs = or(&p.gamma, &[0.8, 1.0]);
    for (k, &t) in ts.iter().enumerate() {
        for (l, &g) in gs.iter().enumerate() {
            let name = format!("Vol(Q_gamma) T={t} gamma={g} Monte Carlo");
            let sd = rng::derive_seed(seed, "volume", (k * gs.len() + l) as u64);
            match covariance::vol_q_mc(t, g, n, sd).and_then(|e| Ok((e, covariance::vol_q_exact(t, g)?))) {
                Ok((e, exact)) => {
                    let tol = 3.0 * e.std_err;
                    out.push(check(s, name, e.value, exact, tol, (e.value - exact).abs() < tol));
                }
                Err(e) => out.push(failed(s, &name, e)),
            }
        }
    }
    let t = 60;
    let fine = covariance::log_vol_q_asymptotic(t, VolumePrecision::Fine);
    match covariance::log2_vol_q_exact(t, 1.0) {
        Ok(exact) => out.push(check(
            s,
            "log2 Vol(Q_1) T=60 fine expansion".into(),
            fine,
            exact,
            0.05,
            (fine - exact).abs() < 0.05,
        )),
        Err(e) => out.push(failed(s, "log2 Vol(Q_1) T=60", e)),
    }
    out
}

fn estimator_mse(p: &ValidateParams, seed: u64) -> Vec<Check> {
    let s = Suite::EstimatorMse;
    let t = p.t.first().copied().unwrap_or(3);
    let g = p.gamma.first().copied().unwrap_or(0.8);
    let nrs: Vec<usize> = or(&p.nr, &[100, 1000]).into_iter().map(|v| v as usize).collect();
    match simulator::estimator_mse_sweep(t, g, &nrs, 500, seed) {
        Ok(tab) => tab
            .rows
            .iter()
            .map(|r| {
                let name = format!("MSE q_hat T={t} gamma={g} nr={} pair=({},{})", r.nr, r.pair.0, r.pair.1);
                check(s, name, r.mse, r.bound, r.bound_with_slack - r.bound, r.within_bound)
            })
            .collect(),
        Err(e) => vec![failed(s, "estimator MSE", e)],
    }
}

/// Least-squares slope of `y` on `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn mi_t2(p: &ValidateParams) -> Vec<Check> {
    let s = Suite::MiT2;
    let g = p.gamma.first().copied().unwrap_or(0.5);
    let nrs: Vec<u64> = or(&p.nr, &(10..=16).map(|e| 1u64 << e).collect::<Vec<_>>());
    let ln_alpha = match noncoherent::alpha_t2(g) {
        Ok(a) => a.log2(),
        Err(e) => return vec![failed(s, "alpha_t2", e)],
    };
    let mut out = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut prev: Option<f64> = None;
    for &nr in &nrs {
        let mi = match simulator::mi_exact_t2(nr as usize, g, Prior::Jeffreys, None) {
            Ok(v) => v,
            Err(e) => return vec![failed(s, "mi_exact_t2", e)],
        };
        let pred = 0.5 * (nr as f64 / (2.0 * PI * E)).log2() + ln_alpha;
        let gap = mi - pred;
        let tol = prev.unwrap_or(f64::INFINITY);
        out.push(check(s, format!("gap to large-nr law nr={nr}"), gap, 0.0, tol, gap.abs() < tol));
        prev = Some(gap.abs());
        xs.push((nr as f64).log2());
        ys.push(mi / 2.0);
    }
    if let Some(last) = prev {
        out.push(check(s, "gap at largest nr".into(), last, 0.0, 0.05, last < 0.05));
    }
    if xs.len() >= 2 {
        let slope = ls_slope(&xs, &ys);
        out.push(check(s, "slope per channel use vs log2 nr".into(), slope, 0.25, 0.02, (0.23..=0.27).contains(&slope)));
    }
    out
}

fn orthant_suite(p: &ValidateParams, n: usize, seed: u64) -> Vec<Check> {
    let s = Suite::Orthant;
    let g = p.gamma.first().copied().unwrap_or(0.8);
    let mut out = Vec::new();
    let qs = match covariance::sample_uniform_q_batch(3, g, 20, rng::derive_seed(seed, "orthant-q", 0)) {
        Ok(v) => v,
        Err(e) => return vec![failed(s, "sample q", e)],
    };
    let mut worst: f64 = 0.0;
    for q in &qs {
        let m = orthant::pmf_t3(q).map(|f| f.marginalize_last()).and_then(|m| Ok((m, orthant::pmf_t2(q.entries()[0])?)));
        match m {
            Ok((a, b)) => {
                worst = worst.max(a.pmf().iter().zip(b.pmf()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            }
            Err(e) => return vec![failed(s, "pmf_t3 marginal", e)],
        }
    }
    out.push(check(s, "pmf_t3 marginal equals pmf_t2".into(), worst, 0.0, 1e-14, worst <= 1e-14));

    let tol = 0.005 * (1e6 / n as f64).sqrt().max(1.0);
    let q3 = &qs[0];
    match orthant::pmf_mc(q3, n, rng::derive_seed(seed, "orthant-mc", 0))
        .and_then(|mc| Ok(mc.tv_distance(&orthant::pmf_t3(q3)?)))
    {
        Ok(tv) => out.push(check(s, "pmf_mc T=3 total variation".into(), tv, 0.0, tol, tv < tol)),
        Err(e) => out.push(failed(s, "pmf_mc", e)),
    }
    for t in [2usize, 3] {
        let name = format!("simulate_block pattern pmf T={t} total variation");
        let res = (|| {
            let q = covariance::sample_uniform_q(t, g, rng::derive_seed(seed, "orthant-block-q", t as u64))?;
            let x = covariance::input_from_q(&q, g / (1.0 - g))?;
            let block = simulator::simulate_block(&x, n, rng::derive_seed(seed, "orthant-block", t as u64))?;
            let emp = simulator::empirical_pmf(&block)?;
            let exact = orthant::pmf_exact(&covariance::rho_of_x(&x)?)?;
            Ok::<_, crate::Error>(emp.tv_distance(&exact))
        })();
        match res {
            Ok(tv) => out.push(check(s, name, tv, 0.0, tol, tv < tol)),
            Err(e) => out.push(failed(s, &name, e)),
        }
    }
    let want = (2.0 / PI).powi(3);
    match CorrelationVector::zeros(3).and_then(|q| orthant::fisher_q_numeric(&q, None)) {
        Ok(f) => {
            let v = f.sqrt_det();
            out.push(check(s, "sqrt det Fisher(q) at q=0, T=3".into(), v, want, 0.01, ((v - want) / want).abs() < 0.01))
        }
        Err(e) => out.push(failed(s, "fisher_q_numeric", e)),
    }
    out
}
