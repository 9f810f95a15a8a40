//! Generalized Ruelle transfer operators on discretized one-sided shift
//! spaces.
//!
//! The alphabet is a finite point set carrying a metric and an a-priori
//! measure (counting weights, quadrature weights on the circle or an
//! interval, or weighted atoms). Sequences are truncated at a fixed depth and
//! functions are cylinder functions tabulated on admissible prefixes, so sup
//! norms and Hölder constants are computed exactly on the grid by exhaustive
//! scans.
//!
//! On top of that sit the transfer operator with its explicit norm bounds,
//! the power-series expansion of `psi -> L_psi` with remainder bounds and
//! finite-difference checks of the derivative operators, and a power
//! iteration for the leading eigenvalue and topological pressure.

pub mod analyticity;
pub mod error;
pub mod function_space;
pub mod scenario;
pub mod shift_space;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use function_space::{CylinderFunction, Expr, HolderNorm, PairScope};
pub use shift_space::{Alphabet, IntervalSet, MetricConfig, MetricKind, ShiftSpace, TransitionConstraint, TruncatedSequence};
pub use transfer::{BoundsReport, NormBounds, OperatorHandle};
pub use scenario::{Parameters, Scenario};
pub use spectral::{matrix_oracle, power_iteration, PowerOptions, SpectralResult, TransferMatrix};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
