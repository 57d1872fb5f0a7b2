//! Half-space intersection by the duality transform.
//!
//! With the origin moved to a strictly interior point `c`, the half-space
//! `a·x ≤ b` becomes the dual point `a / (b − a·c)`. The intersection is the
//! polar of the convex hull of the dual points: each dual facet `n·p = h`
//! yields the primal vertex `c + n / h`, and the dual hull vertices are the
//! binding half-spaces.

use super::hull::{convex_hull, Hull3};
use super::{dot3, norm3, GeometryError, Point3};
use crate::lp::{self, BoxedLp, LpStatus};

/// `normal · x ≤ offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace3 {
    normal: Point3,
    offset: f64,
}

impl Halfspace3 {
    /// Normalises `normal`; `None` for a zero or non-finite normal.
    pub fn new(normal: Point3, offset: f64) -> Option<Self> {
        let len = norm3(&normal);
        if !(len > 0.0) || !len.is_finite() || !offset.is_finite() {
            return None;
        }
        Some(Self {
            normal: [normal[0] / len, normal[1] / len, normal[2] / len],
            offset: offset / len,
        })
    }

    pub fn normal(&self) -> Point3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `offset − normal·p`; positive strictly inside.
    pub fn slack(&self, p: &Point3) -> f64 {
        self.offset - dot3(&self.normal, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub point: Point3,
    /// Minimum slack over all half-spaces.
    pub slack: f64,
}

/// Intersection polytope with the indices of its binding half-spaces.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub hull: Hull3,
    pub binding: Vec<usize>,
}

impl Polytope {
    pub fn volume(&self) -> f64 {
        self.hull.volume()
    }
}

fn slack_tolerance(halfspaces: &[Halfspace3]) -> f64 {
    1e-10 * (1.0 + halfspaces.iter().fold(0.0_f64, |m, h| m.max(h.offset.abs())))
}

/// Chebyshev centre: the point maximising the smallest slack.
///
/// Solved through the dual LP `min Σ bᵢyᵢ s.t. Σ yᵢaᵢ = 0, Σ yᵢ = 1, y ≥ 0`,
/// with an extra capped variable keeping the problem feasible when the
/// intersection is unbounded. The centre is read off the equality duals.
pub fn interior_point(halfspaces: &[Halfspace3]) -> Result<InteriorPoint, GeometryError> {
    if halfspaces.is_empty() {
        return Err(GeometryError::Unbounded);
    }
    let bmax = halfspaces.iter().fold(0.0_f64, |m, h| m.max(h.offset));
    let cap = 2.0 * bmax + 1.0;
    let m = halfspaces.len();
    let mut objective = Vec::with_capacity(m + 4);
    let mut table = Vec::with_capacity((m + 4) * 4);
    for h in halfspaces {
        objective.push(-h.offset);
        table.extend_from_slice(&[h.normal[0], h.normal[1], h.normal[2], 1.0]);
    }
    // Cap column, padded so the LP has at least as many columns as rows.
    for _ in 0..4 {
        objective.push(-cap);
        table.extend_from_slice(&[0.0, 0.0, 0.0, 1.0]);
    }
    let lp = BoxedLp::new(objective, table, vec![0.0, 0.0, 0.0, 1.0])
        .map_err(|e| GeometryError::Internal(e.to_string()))?;
    let sol = lp::solve(&lp).map_err(|e| GeometryError::Internal(e.to_string()))?;
    if sol.status != LpStatus::Optimal {
        return Err(GeometryError::Internal("Chebyshev centre LP has no optimum".into()));
    }
    let point = [-sol.duals[0], -sol.duals[1], -sol.duals[2]];
    let slack = halfspaces
        .iter()
        .map(|h| h.slack(&point))
        .fold(f64::INFINITY, f64::min);
    if !(slack > slack_tolerance(halfspaces)) {
        return Err(GeometryError::Infeasible { slack });
    }
    Ok(InteriorPoint { point, slack })
}

/// Vertex representation of `∩ {a·x ≤ b}`, using the Chebyshev centre as the
/// duality origin.
pub fn halfspace_intersection(halfspaces: &[Halfspace3]) -> Result<Polytope, GeometryError> {
    let centre = interior_point(halfspaces)?;
    halfspace_intersection_about(halfspaces, centre.point)
}

/// As [`halfspace_intersection`] with a caller-supplied interior point.
pub fn halfspace_intersection_about(halfspaces: &[Halfspace3], interior: Point3) -> Result<Polytope, GeometryError> {
    let mut acc = DualAccumulator::new(interior);
    for (i, h) in halfspaces.iter().enumerate() {
        acc.push(i, h)?;
    }
    acc.polytope()
}

/// Streams half-spaces into their dual points, periodically discarding dual
/// points that fall inside the current dual hull (redundant constraints).
#[derive(Debug, Clone)]
pub struct DualAccumulator {
    centre: Point3,
    points: Vec<Point3>,
    ids: Vec<usize>,
    compact_at: usize,
    seen: usize,
}

impl DualAccumulator {
    const COMPACT_MIN: usize = 1 << 20;

    pub fn new(centre: Point3) -> Self {
        Self {
            centre,
            points: Vec::new(),
            ids: Vec::new(),
            compact_at: Self::COMPACT_MIN,
            seen: 0,
        }
    }

    pub fn centre(&self) -> Point3 {
        self.centre
    }

    /// Number of half-spaces pushed so far.
    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn push(&mut self, id: usize, h: &Halfspace3) -> Result<(), GeometryError> {
        let beta = h.slack(&self.centre);
        let tol = 1e-12 * (1.0 + h.offset.abs());
        if !(beta > tol) {
            return Err(GeometryError::NotInterior {
                point: self.centre,
                slack: beta,
            });
        }
        self.points.push([h.normal[0] / beta, h.normal[1] / beta, h.normal[2] / beta]);
        self.ids.push(id);
        self.seen += 1;
        if self.points.len() >= self.compact_at {
            self.compact();
        }
        Ok(())
    }

    fn compact(&mut self) {
        if let Ok(h) = convex_hull(&self.points) {
            let points = h.vertices().to_vec();
            let ids = h.source_indices().iter().map(|&i| self.ids[i]).collect();
            self.points = points;
            self.ids = ids;
        }
        self.compact_at = (2 * self.points.len()).max(Self::COMPACT_MIN);
    }

    pub fn polytope(&mut self) -> Result<Polytope, GeometryError> {
        let dual = match convex_hull(&self.points) {
            Ok(h) => h,
            Err(GeometryError::Degenerate { .. }) | Err(GeometryError::TooFewPoints(_)) => {
                return Err(GeometryError::Unbounded)
            }
            Err(e) => return Err(e),
        };
        let tol = dual.tolerance();
        let mut vertices = Vec::with_capacity(dual.faces().len());
        for (n, &h) in dual.face_normals().iter().zip(dual.face_offsets()) {
            if !(h > tol) {
                return Err(GeometryError::Unbounded);
            }
            vertices.push([
                self.centre[0] + n[0] / h,
                self.centre[1] + n[1] / h,
                self.centre[2] + n[2] / h,
            ]);
        }
        vertices.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vertices.dedup();
        let hull = convex_hull(&vertices)?;
        let mut binding: Vec<usize> = dual.source_indices().iter().map(|&i| self.ids[i]).collect();
        binding.sort_unstable();
        // Keep the compacted state for further streaming.
        self.points = dual.vertices().to_vec();
        self.ids = dual.source_indices().iter().map(|&i| self.ids[i]).collect();
        Ok(Polytope { hull, binding })
    }
}
