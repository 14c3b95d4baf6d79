//! Asymptotic capacity of 1-bit quantized MIMO fading channels.
//!
//! The crate evaluates the large-receive-array capacity laws of the coherent
//! and the block-fading non-coherent 1-bit MIMO channel, the lower and upper
//! bounds for arbitrary coherence length `T`, and the Monte Carlo and
//! quadrature oracles used to validate each formula.
//!
//! Module map:
//!
//! - [`scalar`]: Gaussian density, Q-function, `ξ`, `η`, Gamma and ball volumes.
//! - [`quadrature`]: Gauss–Hermite and adaptive Gauss–Kronrod integration.
//! - [`linalg`]: small dense symmetric matrix helpers.
//! - [`covariance`]: correlation vectors, the region `Q_γ`, its volume and samplers.
//! - [`orthant`]: sign-pattern distributions and their Fisher information.
//! - [`coherent`]: `ζ`-integrals and the coherent capacity.
//! - [`noncoherent`]: exact capacity for `T ≤ 3` and bounds for any `T`.
//! - [`simulator`]: channel simulation, the `q̂` estimator and mutual-information oracles.
//! - [`cli`]: the `onebit` command line front end.
//!
//! All capacities are in bits per channel use unless stated otherwise.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod cli;
pub mod coherent;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod noncoherent;
pub mod orthant;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod simulator;

pub use capacity::{CapacityEstimate, CapacityTerms, Method};
pub use error::{Error, Result};
