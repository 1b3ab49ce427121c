//! Exact magnetization-chain dynamics for the mean-field (Curie-Weiss) Ising
//! model at low temperature, together with the deterministic and asymptotic
//! theory of exit times from the unstable zero-magnetization state.
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! route elementary functions through the platform math library (faster in the
//! simulation hot loop); without it everything goes through [`libm`].
//!
//! Modules:
//!
//! * [`model`]: jump rates, drift, free energy, generator, Gibbs weights.
//! * [`theory`]: `m*`, the correction `K(R)`, shift `D(R)`, flow and transit
//!   times, limit laws, and the exact mean exit time of the chain.
//! * [`sim`]: event-driven exact sampling of exit times.
//! * [`stats`]: ECDF, Kolmogorov-Smirnov, sign balance, OLS, goodness-of-fit.
//! * [`special`]: normal CDF and quantile.
#![no_std]
#![forbid(unsafe_code)]
// Negated float comparisons are deliberate: they reject NaN along with the
// out-of-range values. Coefficient tables are kept at their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

mod error;
mod math;

pub mod model;
pub mod quad;
pub mod sim;
pub mod special;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use model::{MagnetizationState, ModelParams};
pub use sim::{ExitSample, Mode, Sampler, SimConfig, ThresholdSpec};
pub use theory::{LimitLaw, TheoryConstants};
