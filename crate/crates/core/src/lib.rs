//! Series and Monte Carlo solutions of distributed-order space-time
//! fractional diffusion on a bounded interval.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod mixture;
pub mod quad;
pub mod speckit;
pub mod spectral;
pub mod stats;
pub mod stochastic;
pub mod validation;

pub use error::{Error, Result};
pub use mixture::{Atom, ContinuousDensity, FiniteAtoms, MixingMeasure};
