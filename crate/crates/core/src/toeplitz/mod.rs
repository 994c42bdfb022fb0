//! Toeplitz sequence over the symbols `0..=4`, built from nested residue classes.
//!
//! Level `p` fixes the symbol on `2^{p+1}` classes mod `n_p` and leaves `2^{p+1}`
//! classes open for the next level; every other class carries 0.

mod audit;
mod eval;
mod spec;
#[cfg(test)]
mod tests;

pub use audit::{
    default_audit_ranges, pair_independence_audit, AuditTarget, IndependentPair, NearMiss, PairAuditReport,
    PatternShift,
};
pub use eval::{
    difference_check, eval_x, locate, period_certificate, toeplitz_window, window, witness_for_pattern,
    Determination, SymbolEval, ToeplitzWindowReport,
};
pub use spec::{build_spec, colour, verify_spec, FastEval, FastSpec, PropertyCheck, PropertyReport, ToeplitzSpec};
