//! Finite primitives: equidistributed colourings, independence of tuple
//! families, shattering, cover numbers and the analytic constants used by
//! the counting arguments.

mod analytic;
mod census;
mod cover;
mod equidistributed;
mod independence;
mod sets;
mod shatter;

pub use analytic::{
    delta1, entropy_h, regular_bound_check, regular_threshold, shannon_g, shannon_g_f64,
    stirling_check, RegularBoundCheck, StirlingReport,
};
pub use census::{
    deviant_count_convolution, deviant_count_enumeration, deviant_map_census, census_threshold_n1,
    CensusMethod, DeviationCensus,
};
pub use cover::{cover_bracket, cover_number, cover_number_exact, CoverNumber};
pub use equidistributed::{
    enumerate_equidistributed, equidistributed_count, is_equidistributed, EquidistributedMaps,
};
pub use independence::{
    is_independent, max_independent_subset, IndependenceCheck, MaxIndependent, PatternOracle,
};
pub use sets::{GroundSet, IndexedTupleFamily, MapFamily, PatternMap, SubsetMask};
pub use shatter::{is_shattered, largest_shattered, trace};
