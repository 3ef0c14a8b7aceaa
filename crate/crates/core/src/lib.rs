//! Level-dependent Hermite multiwavelet filter banks.
//!
//! The crate builds the interpolatory Hermite subdivision masks that reproduce
//! `span{1, x, x², x³, e^{±λx}}`, completes them to biorthogonal filter banks
//! whose analysis high-pass filters annihilate polynomial and exponential data,
//! and factors every symbol through the level-dependent cancellation operator.
//!
//! Data are Hermite samples (value plus derivatives) stored in
//! *v-coordinates*: at level `n`, component `j` of node `k` holds
//! `2^{-nj} f^{(j)}(2^{-n} k)`.
//!
//! Module map:
//!
//! * [`laurent`] – matrix Laurent polynomials (symbols) and masks
//! * [`annihilator`] – Taylor and cancellation operators
//! * [`subdivision`] – mask construction, the subdivision operator, cascade rendering
//! * [`filterbank`] – filter banks, factorizations, the multilevel transform
//! * [`signal`] – Hermite signals, exact sampling, CSV I/O
//! * [`verify`] – named residual checks aggregated into a report

pub mod annihilator;
pub mod error;
pub mod filterbank;
pub mod laurent;
pub mod signal;
pub mod subdivision;
pub mod tolerances;
pub mod verify;

mod numeric;

pub use annihilator::{make_taylor, Annihilator, SpaceSpec};
pub use error::{Error, Result};
pub use filterbank::{BankFamily, Decomposition, FactorizationPair, FilterBank};
pub use laurent::{Mask, MatLaurent};
pub use signal::{DetailSignal, Function, HermiteSignal};
pub use subdivision::{LevelMask, LimitFunctionTable};
