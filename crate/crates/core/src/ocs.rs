//! Object colour solid boundaries from sampled normals.
//!
//! For a unit normal `k`, the reflectance maximising `k · Φ(r)` is 1 where
//! `k · s(λ) ≥ 0` and 0 elsewhere; its response is the boundary point with
//! outward normal `k`, and `k` with that point's projection gives a supporting
//! half-space.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::geometry::{convex_hull, GeometryError, Hull3, Point3};
use crate::spectral::{ColourResponse, ColourSystem, Reflectance};
use crate::sphere::DirectionSet;

/// Boundary point generated by one direction.
#[derive(Debug, Clone)]
pub struct BoundarySample {
    pub direction: Vec<f64>,
    pub reflectance: Reflectance,
    pub response: ColourResponse,
    pub transitions: usize,
}

/// Supporting half-spaces `K x ≤ b`, one row per sampled normal.
#[derive(Debug, Clone)]
pub struct HalfspaceRep {
    dim: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
}

impl HalfspaceRep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Largest `k_i · x − b_i`; non-positive inside.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| crate::spectral::dot(self.normal(i), x) - self.offsets[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Binary reflectance: 1 where `k · s(λ) ≥ 0`.
pub fn optimal_reflectance(sys: &ColourSystem, k: &[f64]) -> Reflectance {
    let values = sys
        .project(k)
        .into_iter()
        .map(|v| if v >= 0.0 { 1.0 } else { 0.0 })
        .collect();
    Reflectance::clamped(*sys.grid(), values)
}

/// `k · Γ(r_opt(k)) = Δλ Σ_j max(0, k · s(λ_j))`.
pub fn support_value(sys: &ColourSystem, k: &[f64]) -> f64 {
    let sum: f64 = sys
        .rows()
        .map(|row| crate::spectral::dot(row, k).max(0.0))
        .sum();
    sum * sys.grid().delta()
}

/// Number of adjacent sample pairs that differ after thresholding at 0.5.
pub fn count_transitions(values: &[f64]) -> usize {
    values
        .windows(2)
        .filter(|w| (w[0] >= 0.5) != (w[1] >= 0.5))
        .count()
}

pub fn boundary_sample(sys: &ColourSystem, k: Vec<f64>) -> BoundarySample {
    let reflectance = optimal_reflectance(sys, &k);
    let response = ColourResponse(sys.respond_values(reflectance.values()));
    let transitions = count_transitions(reflectance.values());
    BoundarySample {
        direction: k,
        reflectance,
        response,
        transitions,
    }
}

/// One boundary sample per direction, in direction order.
pub fn build_boundary(sys: &ColourSystem, dirs: &DirectionSet) -> Vec<BoundarySample> {
    assert_eq!(dirs.dim(), sys.sensors(), "direction dimension must match sensor count");
    (0..dirs.len())
        .into_par_iter()
        .map(|i| boundary_sample(sys, dirs.vector(i)))
        .collect()
}

pub fn build_halfspace_rep(sys: &ColourSystem, dirs: &DirectionSet) -> HalfspaceRep {
    assert_eq!(dirs.dim(), sys.sensors(), "direction dimension must match sensor count");
    let dim = dirs.dim();
    let normals = dirs.to_table();
    let offsets = normals
        .par_chunks(dim)
        .map(|k| support_value(sys, k))
        .collect();
    HalfspaceRep { dim, normals, offsets }
}

/// Indices of the first sample of each distinct reflectance.
pub fn distinct(samples: &[BoundarySample]) -> Vec<usize> {
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(samples.len());
    let mut keep = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let mut bits = vec![0u64; s.reflectance.values().len().div_ceil(64)];
        for (j, &v) in s.reflectance.values().iter().enumerate() {
            if v >= 0.5 {
                bits[j / 64] |= 1 << (j % 64);
            }
        }
        if seen.insert(bits) {
            keep.push(i);
        }
    }
    keep
}

/// Hull of the distinct boundary responses of a three-sensor system.
pub fn boundary_hull(samples: &[BoundarySample]) -> Result<Hull3, GeometryError> {
    let points: Vec<Point3> = distinct(samples)
        .into_iter()
        .map(|i| {
            let z = samples[i].response.values();
            assert_eq!(z.len(), 3, "hull needs three-sensor responses");
            [z[0], z[1], z[2]]
        })
        .collect();
    convex_hull(&points)
}
