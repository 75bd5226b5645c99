//! Matrix elements of the coherent operator `U(z)` and of the generalized
//! coherent operators `V(z)` (su(1,1), spin `K`) and `W(z)` (su(2), spin `J`).
//!
//! [`closed_form`] evaluates the explicit finite-sum expressions.
//! [`oracle`] recomputes any element by exponentiating a truncated generator
//! and growing the cutoff until the value settles. [`identities`] checks the
//! disentangling formulas, the exchange relations, the group law of `U` and
//! the Laguerre factorization formulas numerically. [`suites`] bundles these
//! into seeded, reproducible verification runs.

pub mod closed_form;
pub mod error;
pub mod identities;
pub mod oracle;
pub mod repr;
pub mod special;
pub mod suites;

pub use num_complex::Complex64 as C64;

pub use closed_form::{element, frame, u_element, v_element, w_element, DisplacementFrame, ElementQuery};
pub use error::{Error, Result};
pub use oracle::{expm_antihermitian, oracle_element, OracleConfig, OracleResult};
pub use repr::{generator, ladder_matrices, AlgebraKind, AlgebraSpec, Ladder, TruncatedOperator};
