//! Optimal quadrature with endpoint-derivative corrections in the Hilbert
//! space W₂^(2,1)(0,1).
//!
//! The rule keeps the trapezoid value weights and adds first-derivative
//! weights chosen to minimise the norm of the error functional. Besides the
//! closed-form weights and norm, the crate carries independent routes to the
//! same numbers (a dense solve of the Lagrange system, a discrete-convolution
//! reconstruction, a double-double brute-force norm and a Bernoulli series)
//! and a small convergence laboratory.
//!
//! ```
//! use optquad_core::rules::{apply_rule, builtin, optimal_rule, Grid};
//!
//! let rule = optimal_rule(Grid::new(8).unwrap());
//! let exp = builtin("exp").unwrap();
//! let approx = apply_rule(&rule, &exp);
//! assert!((approx - (std::f64::consts::E - 1.0)).abs() < 1e-13);
//! ```

pub mod convergence_lab;
pub mod discrete_operator;
pub mod error;
pub mod error_norm;
pub mod exec;
pub mod gauss_legendre;
pub mod kernels;
pub mod rules;
pub mod system_oracle;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use rules::{Grid, IntegrandSpec, QuadratureRule, RuleKind};
