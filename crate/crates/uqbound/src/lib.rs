//! Robust performance bounds for systems with mixed aleatoric and epistemic
//! uncertainty: polynomial-chaos surrogates, risk-sensitive integrals over
//! relative-entropy ambiguity sets, and the optimal-c bound search.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod models;
pub mod orthopoly;
pub mod riskbounds;
pub mod surrogate;

pub use error::{Error, Result};
