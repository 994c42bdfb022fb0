//! Extraction of independence sets from adversarial choices `ψ ↦ Z_ψ` or
//! `ψ ↦ f_ψ` over the equidistributed colourings `ℛ([n], k)`.
//!
//! Ground sets are `{0,…,n−1}` with `n ≤ 64`, so subsets are `u64` masks.
//! Colours run over `1..=k`.

mod adversary;
mod engine;
mod equal_split;
mod grid;
mod search;

pub use adversary::{equidistributed_maps, Exponent, FunctionAdversary, SetAdversary, MAX_MAPS};
pub use engine::{extendable_core, extendable_core_with_budget, ExtractionCertificate, Witness, DEFAULT_BUDGET};
pub use equal_split::{equal_split_adversary, equal_split_order};
pub use grid::{threshold_grid, ThresholdGrid};
pub use search::{
    func_to_indep_search, half_to_indep_search, indicator_function_adversary, partial_indep_search,
    partial_theta, proof_pipeline_half, HalfExtraction, PartialExtraction, PipelineReport,
};

#[cfg(test)]
mod tests;
