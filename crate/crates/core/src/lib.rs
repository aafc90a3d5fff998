//! Numerical toolkit for the elliptic quantum group `E_{τ,η}(so₃)`: Jacobi
//! theta functions, the dynamical R-matrix, the shift-operator algebra of its
//! representations, commuting transfer matrices and the recursive Bethe
//! creation operators.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bethe;
pub mod dynalg;
pub mod elliptic;
pub mod error;
pub mod exchange;
pub mod harness;
pub mod linalg;
pub mod repspace;
pub mod rmatrix;
pub mod sampling;
pub mod transfer;

pub use elliptic::{CoeffName, ModularParams, Period};
pub use error::{Error, Result};
