//! Time-spectral solution of initial-value ODEs.
//!
//! The solution on each time interval is a truncated Chebyshev series whose
//! coefficients are found implicitly for the whole interval at once
//! ([`gwrm`]). Interval lengths adapt to the decay of the highest modes.
//! Around that core sit the spectral operators ([`chebyshev`]), the
//! fixed-point solver ([`sir`]), smoothing reformulations ([`smoothing`]),
//! local Lyapunov diagnostics ([`diagnostics`]) and explicit/implicit
//! reference integrators ([`refsolvers`]).

pub mod chebyshev;
pub mod diagnostics;
pub mod error;
pub mod gwrm;
pub mod linalg;
pub mod problems;
pub mod refsolvers;
mod serde_float;
pub mod sir;
pub mod smoothing;

pub use chebyshev::{ChebSeries, Interval};
pub use error::{Error, Result};
pub use gwrm::{GwrmConfig, GwrmSolution, RunStatus};
pub use linalg::Matrix;
pub use problems::OdeProblem;
pub use sir::{SolveStats, SolverConfig, SolverMode};
