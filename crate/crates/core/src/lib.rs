//! Mollified mean-value functionals for the Mueller-type gap criterion:
//! if `h(c) < 1` then the largest normalized gap between consecutive zeta
//! zeros exceeds `c/π`.
//!
//! * [`kernels`]: closed-form polynomial algebra on `[0, 1]`
//! * [`functionals`]: `U`, `V1`, `V2`, `V3` and `h(c)`
//! * [`optimize`]: quadratic forms, exact minimization and bisection
//! * [`oracle`]: independent window-quadrature and divisor-sum checks
//! * [`zeros`]: zero-table ingestion and normalized gap statistics
//! * [`cli`]: the batch front-end behind the `zetagap` binary

pub mod cli;
pub mod functionals;
pub mod kernels;
pub mod optimize;
pub mod oracle;
pub mod presets;
pub mod quadrature;
pub mod real;
pub mod special;
pub mod zeros;

pub use functionals::{compute_h, FunctionalBreakdown, FunctionalError, FunctionalParams};
pub use kernels::{KernelPolynomial, Polynomial};
