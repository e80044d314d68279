//! Executable cross-checks: residuals, analytic against Monte Carlo,
//! CTRW convergence and the decay and initial-datum properties.

pub mod crossval;
pub mod ctrw;
pub mod properties;
pub mod report;
pub mod residual;

pub use crossval::{compare_analytic_mc, time_change_bias_bound, CrossSpec, CrossValidation};
pub use ctrw::{ctrw_convergence, reference_inverse_sample, CtrwConvergence, CtrwSettings};
pub use properties::{decay_report, initial_datum_report};
pub use report::{ComparisonPoint, ComparisonReport, Status};
pub use residual::{eigen_convergence, pde_convergence, residual_eigen, residual_pde, ConvergenceStudy, WINDOW_START};
