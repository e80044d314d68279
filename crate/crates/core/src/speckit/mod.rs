//! Special functions and temporal kernels.

pub mod caputo;
pub mod gamma;
pub mod mittag_leffler;
pub mod relax;
pub mod talbot;

pub use caputo::{caputo_derivative, distributed_order_derivative, TimeGrid};
pub use gamma::{gamma, ln_gamma};
pub use mittag_leffler::mittag_leffler;
pub use relax::{h_distributed, h_multiterm, h_single, HEvaluator, PsiTable};
