//! Dirichlet eigenstructure on an interval and the series solution.

pub mod basis;
pub mod datum;
pub mod decay;
pub mod heat;
pub mod series;

pub use basis::{eigen_exact_laplace, eigen_fractional, BasisKind, EigenBasis, IntervalDomain};
pub use datum::InitialDatum;
pub use decay::{coefficient_decay_check, decay_estimate, eigenvalue_growth, initial_datum_check, DecayReport};
pub use heat::{heat_apply, heat_kernel};
pub use series::{phi_transform, solve_series, SpectralSolution};
