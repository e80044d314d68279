//! Monte Carlo for the time-changed killed process and the CTRW limit.

pub mod ctrw;
pub mod estimator;
pub mod motion;
pub mod rng;
pub mod stable;
pub mod subordinator;

pub use ctrw::{ctrw_limit_atoms, ctrw_simulate, waiting_time, OrderSampler};
pub use estimator::{
    collect_chunked, mc_inverse_functional, mc_solution, mc_solution_grid, mc_subordinator_laplace, richardson_factor,
    time_change_atoms, Datum, McConfig, McEstimate, McGrid, McProblem, KILLING_RATE,
};
pub use motion::{sample_killed_stable_position, StableStep};
pub use rng::RngStream;
pub use stable::{positive_stable, sample_stable_increment, symmetric_increment, symmetric_stable};
pub use subordinator::{
    first_passage_times, sample_inverse_single_exact, sample_inverse_subordinator, sample_multiterm_path,
    MultitermStep, SubordinatorPath,
};
