//! Exact convex-geometry certificates for finite-dimensional normed spaces:
//! hull membership, sign-threshold extraction from dual images of embeddings
//! into `ℓ_∞^m`, and the simplex-net intersection argument.
//!
//! All feasibility questions go through the exact simplex in [`crate::lp`].

mod embedding;
mod flm;
mod hull;
mod net;

pub use embedding::{dual_image, sign_embedding, DualImage, LinearMapData, NormValue};
pub use flm::{flm_bound_audit, flm_extract, FlmAudit, FlmCertificate, FlmWitness};
pub use hull::{conjugate, hull_member, norm_at_most, norm_exact, norm_f64, HullMembership, VectorFamily};
pub use net::{
    grid_radius, l1_distance, random_net_family, simplex_net, simplex_net_intersection, NetIntersection, NetOutcome,
    SimplexNet, MAX_NET,
};
