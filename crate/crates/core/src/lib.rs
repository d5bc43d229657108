//! Stability analysis and time stepping for ImEx linear multistep schemes
//! applied to stiff splittings `u' = A u + B u + f` with `A` symmetric
//! negative definite.
//!
//! - [`scheme`]: the delta-parameterized coefficient family and generic schemes
//!   built from the roots of `c(z)`.
//! - [`region`]: the unconditional-stability region of a scheme and its
//!   boundary curves.
//! - [`splitting`]: generalized numerical ranges of a splitting `(A, B)` and
//!   stability certification.
//! - [`stepping`]: the multistep recursion, its companion matrix and
//!   global-error measurement.
//! - [`problems`]: scalar and Chebyshev-collocation test problems and
//!   convergence studies.

pub mod error;
pub mod poly;
pub mod problems;
pub mod region;
pub mod scheme;
pub mod splitting;
pub mod stepping;

pub use error::{Error, Result};
pub use problems::{chebyshev_grid, convergence_study, diffusion_splitting, gte_study, scalar_problem};
pub use region::{member_finite, member_infinite, member_unconditional, ComplexCurve, ScaledStep};
pub use scheme::{build_scheme, scheme_from_c_roots, tabulated_scheme, ImExScheme};
pub use splitting::{certify, generalized_spectrum, largest_stable_delta, validate_splitting, wp_set, Splitting};
pub use stepping::{companion_matrix, empirical_stability, global_error, run, SteppingPlan, Trajectory};
