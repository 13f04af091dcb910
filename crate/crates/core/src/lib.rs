//! Numerical laboratory for finite and one-dimensional metric measure spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cd;
pub mod coefficients;
pub mod concentration;
pub mod config;
pub mod error;
pub mod experiments;
pub mod extreal;
pub mod quadrature;
pub mod report;
pub mod space;
pub mod transport;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use space::{Coupling, FiniteMmSpace, ProbWeights};
