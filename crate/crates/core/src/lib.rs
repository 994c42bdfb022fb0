//! Finite combinatorial machinery around combinatorial independence.
//!
//! Every search in this crate comes with an independent re-check of the
//! witness it returns. Exhaustive loops run on rayon when the `parallel`
//! feature is on and sequentially otherwise; results never depend on the
//! number of workers.

pub mod banach;
pub mod dynamics;
pub mod error;
pub mod extraction;
pub mod indep_core;
pub mod lp;
pub mod par;
pub mod rational;
pub mod toeplitz;

pub use error::{Error, Result};
