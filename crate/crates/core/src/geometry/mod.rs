//! Three-dimensional convex geometry: hulls, volumes, Chebyshev centres and
//! half-space intersection through the point/plane duality.

mod halfspace;
mod hull;

use thiserror::Error;

pub use halfspace::{
    halfspace_intersection, halfspace_intersection_about, interior_point, DualAccumulator, Halfspace3,
    InteriorPoint, Polytope,
};
pub use hull::{convex_hull, Hull3, EPS_REL};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Coincident,
    Collinear,
    Coplanar,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("input points are {kind:?}; the hull is not full-dimensional")]
    Degenerate { kind: Degeneracy },
    #[error("half-space intersection is empty or flat (max-min slack {slack:e})")]
    Infeasible { slack: f64 },
    #[error("half-space intersection is unbounded")]
    Unbounded,
    #[error("interior point {point:?} is not strictly inside every half-space (slack {slack:e})")]
    NotInterior { point: Point3, slack: f64 },
    #[error("internal geometry error: {0}")]
    Internal(String),
}

impl GeometryError {
    /// Flat or empty inputs, as opposed to solver faults.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            GeometryError::Degenerate { .. } | GeometryError::Infeasible { .. } | GeometryError::TooFewPoints(_)
        )
    }
}

pub fn volume(h: &Hull3) -> f64 {
    h.volume()
}

pub(crate) fn dot3(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub3(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &Point3) -> f64 {
    dot3(a, a).sqrt()
}

#[cfg(test)]
mod tests;
