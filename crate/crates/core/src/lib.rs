//! Correlation, entanglement and discord measures for fermionic mode systems,
//! with optional parity or particle-number superselection rules.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densmat;
pub mod discord;
pub mod error;
pub mod fock;
pub mod hubbard;
pub mod measures;
pub mod particle;
pub mod random;
pub mod rdmio;
pub mod scan;
pub mod sep_opt;
pub mod ssr;
pub mod twoorb;

pub use densmat::{DensityMatrix, HermitianOperator, LogBase, TensorShape};
pub use error::{Error, Result};
pub use ssr::SsrKind;
