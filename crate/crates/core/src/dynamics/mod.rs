//! Unions of full shifts over ℤ with finitely supported measures.
//!
//! Points are finite patterns on a constant background, so every cylinder question about
//! translates is decided exactly, and every measure value is an exact rational.

mod layer;
mod measure;
mod not_ie;
mod shift;
#[cfg(test)]
mod tests;

pub use layer::{
    layer_cake_split, random_layer_cake_instance, random_sum3_values, sum3_audit, sum3_points, LayerCakeSplit,
    StepCell, StepFunction, Sum3Outcome,
};
pub use measure::{
    convex_witness_combine, in_pattern_nbhd, large_density_extract, measure_of, translate, Atom, CombinedWitnesses,
    DensityExtract, FiniteMeasure, NbhdConstraint, WeakStarNbhd,
};
pub use not_ie::{
    measure_indep_audit, not_ie_instance, point_reduction, MeasureAuditReport, NotIeInstance, PatternWitness,
    PointReduction, TwoAtomGenerator, WitnessGenerator,
};
pub use shift::{
    interval_independence_density, satisfiable, CylinderOracle, CylinderSet, IntervalDensity, PatternPoint,
    SatOutcome, SubshiftSpec, Symbol, DENSITY_BUDGET,
};
