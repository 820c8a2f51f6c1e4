//! Numerical engine for a bivariate Szász–Mirakjan type operator family
//! `Ŷ_{m,n,a}` (a Poisson-type kernel with means `m·x·λ_m`, `n·y·λ_n`,
//! `λ_m = log a / (m(a^{1/m} − 1))`, fixed base `a > 1`) and the classical
//! bivariate operator `S_{m,n}` it is compared against.
//!
//! The crate provides
//!
//! * numerically stable kernel weights ([`kernel`]),
//! * an expression front end for test functions ([`fnexpr`]),
//! * truncated series evaluation with certified tail bounds ([`operator`]),
//! * closed-form raw/central/mixed moments and their asymptotic limits
//!   ([`moments`]),
//! * partial derivatives of the operator — simultaneous approximation
//!   ([`deriv`]),
//! * weighted-space machinery, error-table presets, Voronovskaya and
//!   convergence-order studies ([`analysis`]).

pub mod analysis;
pub mod deriv;
pub mod error;
pub mod fnexpr;
pub mod kernel;
pub mod moments;
pub mod operator;

pub use error::{Error, Result};
pub use fnexpr::{builtin, BivariateFn};
pub use kernel::OperatorParams;
pub use operator::{EvalConfig, EvalResult};
