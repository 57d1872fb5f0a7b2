//! Metamer mismatch volumes.
//!
//! The mismatch volume of `z₀` is the cross-section `{z′ : (z₀, z′) ∈ Γ(X)}`
//! of the six-dimensional object colour solid of the stacked system
//! `Γ = (Φ, Ψ)`. Two engines are provided, both driven by directions sampled
//! on the unit sphere in `R⁶`:
//!
//! * **LP**: for each `k`, maximise `(S k)ᵀ r` (or `(U k)ᵀ r` with the
//!   orthonormalised spectra `U`) subject to `Φ(r) = z₀`, `0 ≤ r ≤ 1`, and
//!   record `Ψ(r)`. The hull of those points is inscribed in the volume.
//! * **Half-space slice**: each `k` gives the supporting half-space
//!   `k · x ≤ b` of the 6-D solid. Substituting `x = (z₀, z′)` leaves
//!   `k_Ψ · z′ ≤ b − k_Φ · z₀` in `R³`; intersecting those circumscribes the
//!   volume.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{convex_hull, DualAccumulator, GeometryError, Halfspace3, Hull3, Point3};
use crate::lp::{self, BasisToken, BoxedLp, LpError, LpStatus};
use crate::ocs::{count_transitions, support_value, HalfspaceRep};
use crate::spectral::{orthonormalize, stack, ColourResponse, ColourSystem, Orthonormalization, Reflectance, SpectralError};
use crate::sphere::DirectionSet;

/// Half-space normals whose `Ψ` block is shorter than this are dropped.
const MIN_SLICE_NORMAL: f64 = 1e-12;
/// Directions evaluated per parallel batch in the slicing method.
const SLICE_BATCH: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum MmvError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("mismatch problem needs two three-sensor systems, got {phi} and {psi} sensors")]
    SensorCount { phi: usize, psi: usize },
    #[error("target response {z0:?} lies outside the object colour solid of Φ")]
    Infeasible { z0: Vec<f64> },
    #[error("direction set has dimension {found}, expected 6")]
    DirectionDim { found: usize },
    #[error("LP for direction {index} failed: {source}")]
    Solver { index: usize, source: LpError },
    #[error("LP for direction {index} returned an inaccurate solution (residual {residual:e})")]
    Inaccurate { index: usize, residual: f64 },
    #[error("mismatch volume is degenerate: {0}")]
    Degenerate(GeometryError),
    #[error("half-space slice is empty or flat: {0}")]
    DegenerateSlice(GeometryError),
    #[error("geometry failure: {0}")]
    Geometry(GeometryError),
}

impl MmvError {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, MmvError::Degenerate(_) | MmvError::DegenerateSlice(_))
    }
}

fn hull_error(e: GeometryError) -> MmvError {
    if e.is_degenerate() {
        MmvError::Degenerate(e)
    } else {
        MmvError::Geometry(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MmvMethod {
    LpOriginal,
    LpOrthonormal,
    HalfspaceOriginal,
    HalfspaceOrthonormal,
    FiveTransition,
}

impl MmvMethod {
    pub const ALL: [MmvMethod; 5] = [
        MmvMethod::LpOriginal,
        MmvMethod::LpOrthonormal,
        MmvMethod::HalfspaceOriginal,
        MmvMethod::HalfspaceOrthonormal,
        MmvMethod::FiveTransition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MmvMethod::LpOriginal => "lp_original",
            MmvMethod::LpOrthonormal => "lp_orthonormal",
            MmvMethod::HalfspaceOriginal => "halfspace_original",
            MmvMethod::HalfspaceOrthonormal => "halfspace_orthonormal",
            MmvMethod::FiveTransition => "five_transition",
        }
    }

    pub fn is_orthonormal(self) -> bool {
        matches!(self, MmvMethod::LpOrthonormal | MmvMethod::HalfspaceOrthonormal)
    }
}

impl fmt::Display for MmvMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MmvMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Target response `z₀` under `Φ`, to be mapped through `Ψ`.
#[derive(Debug, Clone)]
pub struct MismatchProblem {
    phi: ColourSystem,
    psi: ColourSystem,
    z0: ColourResponse,
    stacked: ColourSystem,
    ortho: Orthonormalization,
    eq_matrix: Vec<f64>,
    base: BasisToken,
}

impl MismatchProblem {
    pub fn new(phi: ColourSystem, psi: ColourSystem, z0: ColourResponse) -> Result<Self, MmvError> {
        if phi.sensors() != 3 || psi.sensors() != 3 || z0.values().len() != 3 {
            return Err(MmvError::SensorCount {
                phi: phi.sensors(),
                psi: psi.sensors(),
            });
        }
        let stacked = stack(&phi, &psi)?;
        let ortho = orthonormalize(&stacked)?;
        let delta = phi.grid().delta();
        let eq_matrix: Vec<f64> = phi.rows().flatten().map(|v| v * delta).collect();
        let lp = BoxedLp::new(vec![0.0; phi.samples()], eq_matrix.clone(), z0.values().to_vec())
            .map_err(|source| MmvError::Solver { index: 0, source })?;
        let base = match lp::feasible_point(&lp) {
            Ok(fp) => fp.basis,
            Err(LpError::Infeasible { .. }) => return Err(MmvError::Infeasible { z0: z0.0.clone() }),
            Err(source) => return Err(MmvError::Solver { index: 0, source }),
        };
        Ok(Self {
            phi,
            psi,
            z0,
            stacked,
            ortho,
            eq_matrix,
            base,
        })
    }

    /// Flat grey `r ≡ level` as the target.
    pub fn flat_grey(phi: ColourSystem, psi: ColourSystem, level: f64) -> Result<Self, MmvError> {
        let z0 = ColourResponse(phi.respond_values(&vec![level; phi.samples()]));
        Self::new(phi, psi, z0)
    }

    pub fn phi(&self) -> &ColourSystem {
        &self.phi
    }

    pub fn psi(&self) -> &ColourSystem {
        &self.psi
    }

    pub fn z0(&self) -> &ColourResponse {
        &self.z0
    }

    /// `(Φ, Ψ)` as one six-sensor system.
    pub fn stacked(&self) -> &ColourSystem {
        &self.stacked
    }

    pub fn orthonormalization(&self) -> &Orthonormalization {
        &self.ortho
    }

    /// The LP over the metamer set with objective `c`.
    pub fn lp(&self, objective: Vec<f64>) -> BoxedLp {
        BoxedLp {
            objective,
            eq_matrix: self.eq_matrix.clone(),
            eq_rhs: self.z0.values().to_vec(),
        }
    }

    /// Normal in `(z, z′)` response space whose optimal spectra match
    /// direction `k` of the chosen parametrisation.
    pub fn response_direction(&self, k: &[f64], orthonormal: bool) -> Vec<f64> {
        if orthonormal {
            self.ortho.original_direction(k)
        } else {
            k.to_vec()
        }
    }

    /// Metamer of `z₀` maximising `cᵀr`, warm-started from the shared basis.
    pub fn solve(&self, objective: Vec<f64>) -> Result<lp::LpSolution, LpError> {
        lp::solve_warm(&self.lp(objective), &self.base)
    }

    /// Response under `Ψ` of a reflectance value slice.
    pub fn psi_response(&self, r: &[f64]) -> Point3 {
        let z = self.psi.respond_values(r);
        [z[0], z[1], z[2]]
    }

    /// A point strictly inside the mismatch volume: the `Ψ` response of the
    /// mean of the metamers extremal along `±` each `Ψ` axis.
    pub fn interior_response(&self) -> Result<Point3, MmvError> {
        let q = self.phi.samples();
        let mut mean = vec![0.0; q];
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let c: Vec<f64> = self.psi.rows().map(|row| sign * row[axis]).collect();
                let sol = self.solve(c).map_err(|source| MmvError::Solver { index: axis, source })?;
                if sol.status != LpStatus::Optimal {
                    return Err(MmvError::Infeasible { z0: self.z0.0.clone() });
                }
                mean.iter_mut().zip(&sol.r).for_each(|(m, r)| *m += r / 6.0);
            }
        }
        Ok(self.psi_response(&mean))
    }
}

/// Boundary points of a mismatch volume and their hull.
#[derive(Debug, Clone)]
pub struct MmvResult {
    pub method: MmvMethod,
    /// Responses `z′ = Ψ(r)` on the boundary, one per direction (LP and
    /// baseline) or the slice polytope vertices (half-space methods).
    pub points: Vec<Point3>,
    /// Spectra behind `points`; empty for the half-space methods.
    pub spectra: Vec<Reflectance>,
    pub hull: Hull3,
    pub volume: f64,
    /// Directions (or seeds) used.
    pub sample_count: usize,
    pub wavelength_step: f64,
    /// Half-spaces bounding the slice; zero for the LP and baseline methods.
    pub binding_count: usize,
}

impl MmvResult {
    /// The result the first `m` directions would have produced. Only
    /// meaningful for the LP methods, whose points follow direction order.
    pub fn prefix(&self, m: usize) -> Result<MmvResult, MmvError> {
        assert!(
            matches!(self.method, MmvMethod::LpOriginal | MmvMethod::LpOrthonormal),
            "prefixes of {} results are not defined",
            self.method
        );
        let m = m.min(self.points.len());
        let points = self.points[..m].to_vec();
        let hull = hull_of(&points)?;
        Ok(MmvResult {
            method: self.method,
            volume: hull.volume(),
            spectra: self.spectra[..m].to_vec(),
            points,
            hull,
            sample_count: m,
            wavelength_step: self.wavelength_step,
            binding_count: 0,
        })
    }
}

pub(crate) fn hull_of(points: &[Point3]) -> Result<Hull3, MmvError> {
    let mut unique = points.to_vec();
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    unique.dedup();
    convex_hull(&unique).map_err(hull_error)
}

fn check_dirs(dirs: &DirectionSet) -> Result<(), MmvError> {
    if dirs.dim() != 6 {
        return Err(MmvError::DirectionDim { found: dirs.dim() });
    }
    Ok(())
}

/// One LP per direction; see the module docs.
pub fn mmv_lp(problem: &MismatchProblem, dirs: &DirectionSet, orthonormal: bool) -> Result<MmvResult, MmvError> {
    check_dirs(dirs)?;
    let spectra_sys = if orthonormal {
        &problem.ortho.basis
    } else {
        &problem.stacked
    };
    let grid = *problem.phi.grid();
    let solved: Vec<(Point3, Reflectance)> = (0..dirs.len())
        .into_par_iter()
        .map(|i| {
            let k = dirs.vector(i);
            let c = spectra_sys.project(&k);
            let lp = problem.lp(c);
            let sol = lp::solve_warm(&lp, &problem.base).map_err(|source| MmvError::Solver { index: i, source })?;
            if sol.status != LpStatus::Optimal {
                return Err(MmvError::Infeasible { z0: problem.z0.0.clone() });
            }
            if sol.residual > lp.eq_tolerance() {
                return Err(MmvError::Inaccurate {
                    index: i,
                    residual: sol.residual,
                });
            }
            let z = problem.psi_response(&sol.r);
            Ok((z, Reflectance::clamped(grid, sol.r)))
        })
        .collect::<Result<_, _>>()?;
    let (points, spectra): (Vec<Point3>, Vec<Reflectance>) = solved.into_iter().unzip();
    let hull = hull_of(&points)?;
    Ok(MmvResult {
        method: if orthonormal {
            MmvMethod::LpOrthonormal
        } else {
            MmvMethod::LpOriginal
        },
        volume: hull.volume(),
        points,
        spectra,
        hull,
        sample_count: dirs.len(),
        wavelength_step: grid.delta(),
        binding_count: 0,
    })
}

/// The `R³` half-space that direction `k` (already in response space)
/// induces on the slice `z = z₀`, or `None` when its `Ψ` block vanishes.
pub fn slice_halfspace(stacked: &ColourSystem, z0: &[f64], k: &[f64]) -> Option<Halfspace3> {
    let b = support_value(stacked, k);
    slice_row(k, b, z0)
}

fn slice_row(k: &[f64], b: f64, z0: &[f64]) -> Option<Halfspace3> {
    let normal = [k[3], k[4], k[5]];
    let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    if len < MIN_SLICE_NORMAL {
        return None;
    }
    let offset = b - (k[0] * z0[0] + k[1] * z0[1] + k[2] * z0[2]);
    Halfspace3::new(normal, offset)
}

/// Half-space slicing; equivalent to [`mmv_halfspace_nested`] with a single
/// checkpoint at `dirs.len()`.
pub fn mmv_halfspace(problem: &MismatchProblem, dirs: &DirectionSet, orthonormal: bool) -> Result<MmvResult, MmvError> {
    let mut out = mmv_halfspace_nested(problem, dirs, orthonormal, &[dirs.len()])?;
    Ok(out.pop().expect("one checkpoint"))
}

/// Half-space slicing evaluated at each prefix length in `checkpoints`
/// (ascending), reusing the work of earlier prefixes. Directions are streamed
/// so the full `t × 6` table is never materialised.
pub fn mmv_halfspace_nested(
    problem: &MismatchProblem,
    dirs: &DirectionSet,
    orthonormal: bool,
    checkpoints: &[usize],
) -> Result<Vec<MmvResult>, MmvError> {
    check_dirs(dirs)?;
    assert!(
        checkpoints.windows(2).all(|w| w[0] < w[1]) && checkpoints.last().is_some_and(|&t| t <= dirs.len()),
        "checkpoints must be ascending prefix lengths"
    );
    let interior = problem.interior_response()?;
    let z0 = problem.z0.values();
    let mut acc = DualAccumulator::new(interior);
    let mut results = Vec::with_capacity(checkpoints.len());
    let mut done = 0;
    for &t in checkpoints {
        while done < t {
            let end = (done + SLICE_BATCH).min(t);
            let rows: Vec<Option<Halfspace3>> = (done..end)
                .into_par_iter()
                .map(|i| {
                    let k = problem.response_direction(&dirs.vector(i), orthonormal);
                    slice_halfspace(&problem.stacked, z0, &k)
                })
                .collect();
            for (i, h) in (done..end).zip(rows) {
                if let Some(h) = h {
                    acc.push(i, &h).map_err(MmvError::DegenerateSlice)?;
                }
            }
            done = end;
        }
        let poly = acc.polytope().map_err(|e| match e {
            GeometryError::Unbounded => MmvError::DegenerateSlice(e),
            e if e.is_degenerate() => MmvError::DegenerateSlice(e),
            e => MmvError::Geometry(e),
        })?;
        results.push(MmvResult {
            method: if orthonormal {
                MmvMethod::HalfspaceOrthonormal
            } else {
                MmvMethod::HalfspaceOriginal
            },
            points: poly.hull.vertices().to_vec(),
            spectra: Vec::new(),
            volume: poly.volume(),
            binding_count: poly.binding.len(),
            hull: poly.hull,
            sample_count: t,
            wavelength_step: problem.phi.grid().delta(),
        });
    }
    Ok(results)
}

/// Slices a prebuilt 6-D half-space representation (normals in response
/// space) at the problem's `z₀`.
pub fn slice_halfspace_rep(problem: &MismatchProblem, rep: &HalfspaceRep) -> Result<MmvResult, MmvError> {
    assert_eq!(rep.dim(), 6, "slicing needs a six-dimensional representation");
    let interior = problem.interior_response()?;
    let z0 = problem.z0.values();
    let mut acc = DualAccumulator::new(interior);
    for i in 0..rep.len() {
        if let Some(h) = slice_row(rep.normal(i), rep.offsets()[i], z0) {
            acc.push(i, &h).map_err(MmvError::DegenerateSlice)?;
        }
    }
    let poly = acc.polytope().map_err(MmvError::DegenerateSlice)?;
    Ok(MmvResult {
        method: MmvMethod::HalfspaceOriginal,
        points: poly.hull.vertices().to_vec(),
        spectra: Vec::new(),
        volume: poly.volume(),
        binding_count: poly.binding.len(),
        hull: poly.hull,
        sample_count: rep.len(),
        wavelength_step: problem.phi.grid().delta(),
    })
}

/// Histogram of transition counts over a result's spectra, with fractional
/// entries thresholded at 0.5.
pub fn classify_transitions(result: &MmvResult) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for r in &result.spectra {
        *hist.entry(count_transitions(r.values())).or_insert(0) += 1;
    }
    hist
}
