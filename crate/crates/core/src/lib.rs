//! Object colour solids and metamer mismatch volumes.
//!
//! The boundary of an object colour solid is parametrised by unit normals
//! `k`: the reflectance maximising `k · Φ(r)` is 1 where `k · s(λ) ≥ 0` and 0
//! elsewhere. Sampling `k` uniformly on the sphere yields boundary points of
//! the solid, and the same idea in the six-dimensional stacked system gives
//! two routes to a metamer mismatch volume:
//!
//! * [`mmv::mmv_lp`] maximises each sampled direction over the metamer set
//!   with a small linear program;
//! * [`mmv::mmv_halfspace`] writes the 6-D solid as an intersection of
//!   supporting half-spaces and slices it with the affine subspace `z = z₀`.
//!
//! [`baseline`] implements the five-transition approximation used for
//! comparison.

// Negated comparisons reject NaN on purpose; index loops mirror the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod data;
pub mod geometry;
pub mod lp;
pub mod mmv;
pub mod ocs;
pub mod spectral;
pub mod sphere;

pub use data::Illuminant;
pub use geometry::{convex_hull, halfspace_intersection, interior_point, volume, GeometryError, Halfspace3, Hull3};
pub use lp::{solve, BoxedLp, LpSolution, LpStatus};
pub use mmv::{MismatchProblem, MmvError, MmvMethod, MmvResult};
pub use spectral::{ColourResponse, ColourSystem, Reflectance, Spectrum, WavelengthGrid};
pub use sphere::{sample_sphere, DirectionSet};
