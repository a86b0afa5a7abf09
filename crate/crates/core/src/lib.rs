//! Squared-variable reformulations of inequality-constrained optimization.
//!
//! The crate provides solvers that work on the reformulated problems (direct
//! square substitution `x = v⊙v` and squared slacks `c(x) = v⊙v`) alongside
//! their classical counterparts, plus checkers for exact and approximate
//! first- and second-order optimality certificates.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bcqp;
pub mod cls;
pub mod linalg;
pub mod lp;
pub mod mps;
pub mod nmf;
pub mod optcert;
pub mod rng;
pub mod trace;

pub use trace::SolveTrace;
