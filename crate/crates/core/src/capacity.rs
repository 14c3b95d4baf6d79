//! The common result record for every capacity formula and bound.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactAsymptotic,
    LowSnr,
    HighSnr,
    LargeNt,
    BoundLb,
    BoundUb,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactAsymptotic => "exact-asymptotic",
            Method::LowSnr => "low-snr",
            Method::HighSnr => "high-snr",
            Method::LargeNt => "large-nt",
            Method::BoundLb => "bound-lb",
            Method::BoundUb => "bound-ub",
            Method::Mc => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Additive breakdown of a capacity value, in bits per channel use.
///
/// `dimension` carries the `n_r` dependence, `volume` the log-volume of the
/// parameter set and `alpha` the log of the Fisher-information integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityTerms {
    pub dimension: f64,
    pub volume: f64,
    pub alpha: f64,
}

impl CapacityTerms {
    pub fn total(&self) -> f64 {
        self.dimension + self.volume + self.alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub bits_per_use: f64,
    pub terms: Option<CapacityTerms>,
    pub method: Method,
    /// The value is exact only up to an `o(1)` term as `n_r → ∞`.
    pub asymptotic: bool,
    /// Monte Carlo standard error of `bits_per_use`, when any term is sampled.
    pub std_err: Option<f64>,
    /// Set when the parameters sit outside the formula's intended regime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl CapacityEstimate {
    pub(crate) fn from_terms(terms: CapacityTerms, method: Method, asymptotic: bool) -> Self {
        CapacityEstimate {
            bits_per_use: terms.total(),
            terms: Some(terms),
            method,
            asymptotic,
            std_err: None,
            warning: None,
        }
    }

    pub(crate) fn with_warning(mut self, warning: Option<String>) -> Self {
        self.warning = warning;
        self
    }

    pub fn nats_per_use(&self) -> f64 {
        self.bits_per_use * std::f64::consts::LN_2
    }
}
