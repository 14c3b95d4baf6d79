//! Single-point evaluations shared by `capacity`, `bounds`, `volume` and
//! `sweep`, and manifest replay.

use crate::capacity::{CapacityEstimate, CapacityTerms, Method};
use crate::coherent::{self, CoherentParams, Regime};
use crate::covariance::{self, VolumePrecision};
use crate::error::{Error, Result};
use crate::noncoherent::{self, NoncoherentParams};
use crate::rng::{self, McConfig};
use crate::simulator::{self, Prior, RunManifest};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    CapacityCoherent,
    CapacityNoncoherent,
    Volume,
    MiT2,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::CapacityCoherent => "capacity-coherent",
            Operation::CapacityNoncoherent => "capacity-noncoherent",
            Operation::Volume => "volume",
            Operation::MiT2 => "mi-t2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }

    pub fn methods(self) -> &'static [&'static str] {
        match self {
            Operation::CapacityCoherent => &["exact", "spherical", "low-snr", "high-snr", "large-nt"],
            Operation::CapacityNoncoherent => &[
                "exact",
                "lb-uniform",
                "lb-indep",
                "lb-indep-exact",
                "ub-genie",
                "low-snr",
                "large-t-lb",
                "large-t-ub",
            ],
            Operation::Volume => &["exact", "mc", "asymptotic-coarse", "asymptotic-fine"],
            Operation::MiT2 => &["jeffreys", "uniform"],
        }
    }

    pub fn default_method(self) -> &'static str {
        self.methods()[0]
    }

    fn uses_samples(self, method: &str, point: &Point) -> bool {
        match self {
            Operation::CapacityNoncoherent => method == "exact" && point.t == Some(3),
            Operation::Volume => method == "mc",
            _ => false,
        }
    }
}

/// One parameter point. Fields an operation does not use stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr: Option<u64>,
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("missing --{flag}")))
}

impl Point {
    /// `snr` from either `--snr` or `--gamma = snr/(1+snr)`.
    fn snr_value(&self) -> Result<f64> {
        match (self.snr, self.gamma) {
            (Some(_), Some(_)) => Err(Error::invalid("give only one of --snr and --gamma")),
            (Some(s), None) => Ok(s),
            (None, Some(g)) => {
                if !(g > 0.0 && g < 1.0) {
                    return Err(Error::invalid(format!("gamma must lie in (0, 1) (gamma = {g})")));
                }
                Ok(g / (1.0 - g))
            }
            (None, None) => Err(Error::invalid("missing --snr or --gamma")),
        }
    }

    fn gamma_value(&self) -> Result<f64> {
        match (self.snr, self.gamma) {
            (None, Some(g)) => Ok(g),
            _ => self.snr_value().map(|s| s / (1.0 + s)),
        }
    }

    fn coherent(&self) -> Result<CoherentParams> {
        if self.t.is_some() || self.gamma.is_some() {
            return Err(Error::invalid("the coherent channel takes --snr, --nt and --nr only"));
        }
        let nt = u32::try_from(self.nt.unwrap_or(1)).map_err(|_| Error::invalid("nt too large"))?;
        CoherentParams::new(need(self.snr, "snr")?, nt, need(self.nr, "nr")?)
    }

    fn noncoherent(&self) -> Result<NoncoherentParams> {
        let t = need(self.t, "T")?;
        NoncoherentParams::new(self.snr_value()?, t, self.nt.unwrap_or(t), need(self.nr, "nr")?)
    }
}

/// Result of one evaluation; errors are kept as values so sweeps can report
/// them per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub value_bits: f64,
    pub std_err: Option<f64>,
    pub terms: Option<CapacityTerms>,
    pub warning: Option<String>,
}

impl From<CapacityEstimate> for Outcome {
    fn from(c: CapacityEstimate) -> Self {
        Outcome { value_bits: c.bits_per_use, std_err: c.std_err, terms: c.terms, warning: c.warning }
    }
}

fn plain(v: f64) -> Outcome {
    Outcome { value_bits: v, std_err: None, terms: None, warning: None }
}

fn unknown_method(op: Operation, method: &str) -> Error {
    Error::invalid(format!("unknown method '{method}' for {}; expected one of {}", op.name(), op.methods().join(", ")))
}

/// Evaluates `op` at `point`. `samples` only matters for Monte Carlo
/// methods; `seed` is the cell seed, used as is.
pub fn evaluate(op: Operation, point: &Point, method: &str, samples: u64, seed: u64) -> Result<Outcome> {
    let samples = usize::try_from(samples).map_err(|_| Error::invalid("samples too large"))?;
    match op {
        Operation::CapacityCoherent => {
            let p = point.coherent()?;
            let regime = match method {
                "exact" => return coherent::capacity_coherent(&p).map(Into::into),
                "spherical" => return coherent::capacity_coherent_spherical(&p).map(Into::into),
                "low-snr" => Regime::LowSnr,
                "high-snr" => Regime::HighSnr,
                "large-nt" => Regime::LargeNt,
                _ => return Err(unknown_method(op, method)),
            };
            let a = coherent::alpha_asymptotic(p.snr, p.nt, regime)?;
            let nt = f64::from(p.nt);
            let terms = CapacityTerms {
                dimension: 0.5 * nt * (p.nr as f64 / (2.0 * PI * E)).log2(),
                volume: crate::scalar::log2_vol_ball(p.nt),
                alpha: a.ln_value / LN_2,
            };
            let m = match regime {
                Regime::LowSnr => Method::LowSnr,
                Regime::HighSnr => Method::HighSnr,
                Regime::LargeNt => Method::LargeNt,
            };
            Ok(CapacityEstimate::from_terms(terms, m, true).with_warning(a.warning).into())
        }
        Operation::CapacityNoncoherent => {
            let p = point.noncoherent()?;
            let est = match method {
                "exact" => noncoherent::capacity_noncoherent_exact(&p, &McConfig { samples, seed })?,
                "lb-uniform" => noncoherent::capacity_lb_uniform(&p)?,
                "lb-indep" => noncoherent::capacity_lb_indep(&p)?,
                "lb-indep-exact" => noncoherent::capacity_lb_indep_exact(&p)?,
                "ub-genie" => noncoherent::capacity_ub_genie(&p)?,
                "low-snr" => noncoherent::capacity_low_snr(&p)?,
                "large-t-lb" | "large-t-ub" => {
                    let w = noncoherent::capacity_large_t_window(&p)?;
                    let v = if method == "large-t-lb" { w.lb } else { w.ub };
                    return Ok(Outcome { warning: w.warning, ..plain(v) });
                }
                _ => return Err(unknown_method(op, method)),
            };
            Ok(est.into())
        }
        Operation::Volume => {
            let t = need(point.t, "T")?;
            let gamma = point.gamma.unwrap_or(1.0);
            if point.snr.is_some() {
                return Err(Error::invalid("volume takes --gamma, not --snr"));
            }
            match method {
                "exact" => Ok(plain(covariance::log2_vol_q_exact(t, gamma)?)),
                "mc" => {
                    let e = covariance::vol_q_mc(t, gamma, samples, seed)?;
                    if e.value <= 0.0 {
                        return Err(Error::NonConvergence { estimate: e.value, error: e.std_err, evaluations: samples });
                    }
                    Ok(Outcome {
                        value_bits: e.value.log2(),
                        std_err: Some(e.std_err / (e.value * LN_2)),
                        terms: None,
                        warning: e.warning,
                    })
                }
                "asymptotic-coarse" | "asymptotic-fine" => {
                    let pr = if method == "asymptotic-fine" { VolumePrecision::Fine } else { VolumePrecision::Coarse };
                    covariance::check_gamma(gamma, true)?;
                    let m = covariance::pair_count(t) as f64;
                    Ok(plain(covariance::log_vol_q_asymptotic(t, pr) + m * gamma.log2()))
                }
                _ => Err(unknown_method(op, method)),
            }
        }
        Operation::MiT2 => {
            if point.t.is_some_and(|t| t != 2) {
                return Err(Error::Unsupported("mi-t2 is defined for T = 2 only".into()));
            }
            let prior = match method {
                "jeffreys" => Prior::Jeffreys,
                "uniform" => Prior::Uniform,
                _ => return Err(unknown_method(op, method)),
            };
            let nr = usize::try_from(need(point.nr, "nr")?).map_err(|_| Error::invalid("nr too large"))?;
            Ok(plain(simulator::mi_exact_t2(nr, point.gamma_value()?, prior, None)?))
        }
    }
}

/// JSON value hashed into `outputs_digest`.
pub fn outcome_json(r: &Result<Outcome>) -> Value {
    match r {
        Ok(o) => serde_json::to_value(o).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub(crate) fn to_params<T: Serialize>(v: &T) -> BTreeMap<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

/// Manifest of one evaluation. Samples are recorded only when the method
/// consumes them.
pub fn cell_manifest(op: Operation, point: &Point, method: &str, samples: u64, seed: u64) -> RunManifest {
    let mut params = to_params(point);
    params.insert("method".into(), Value::from(method));
    let samples = op.uses_samples(method, point).then_some(samples);
    RunManifest::new(op.name(), params, seed, samples)
}

/// Seed of grid cell `index` under `base`.
pub fn cell_seed(base: u64, op: &str, index: usize) -> u64 {
    rng::derive_seed(base, op, index as u64)
}

/// Recomputes the outputs a manifest describes.
pub fn replay(m: &RunManifest) -> Result<Value> {
    let params = Value::Object(m.params.clone().into_iter().collect());
    if let Some(op) = Operation::parse(&m.operation) {
        let method = m.params.get("method").and_then(Value::as_str).unwrap_or(op.default_method()).to_string();
        let mut pm = m.params.clone();
        pm.remove("method");
        let point: Point = serde_json::from_value(Value::Object(pm.into_iter().collect()))
            .map_err(|e| Error::Config(format!("bad manifest params: {e}")))?;
        let samples = m.samples.unwrap_or(rng::DEFAULT_SAMPLES as u64);
        return Ok(outcome_json(&evaluate(op, &point, &method, samples, m.seed)));
    }
    match m.operation.as_str() {
        "simulate" => {
            let p: super::SimulateParams =
                serde_json::from_value(params).map_err(|e| Error::Config(format!("bad manifest params: {e}")))?;
            super::simulate_outputs(&p, m.seed).map(|(_, v)| v)
        }
        "validate" => {
            let p: super::validate::ValidateParams =
                serde_json::from_value(params).map_err(|e| Error::Config(format!("bad manifest params: {e}")))?;
            let samples = m.samples.unwrap_or(rng::DEFAULT_SAMPLES as u64);
            Ok(super::validate::report_json(&super::validate::run_suite(&p, samples, m.seed)))
        }
        other => Err(Error::Config(format!("unknown manifest operation '{other}'"))),
    }
}

/// True when replaying reproduces the recorded digest.
pub fn verify(m: &RunManifest) -> Result<bool> {
    Ok(simulator::sha256_hex(replay(m)?.to_string().as_bytes()) == m.outputs_digest)
}
