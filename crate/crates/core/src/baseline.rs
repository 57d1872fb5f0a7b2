//! The five-transition approximation of a mismatch volume boundary.
//!
//! Random step functions with at most five transitions are fitted so that
//! `Φ(r₅) = z₀`, then mapped through `Ψ`. The hull of the accepted points is
//! contained in the true mismatch volume and typically falls well short of it.
//!
//! Transitions sit at continuous wavelengths. A step at `t` inside the cell
//! `[λ_j, λ_{j+1})` contributes `(λ_{j+1} − t) / Δλ` of sample `j + 1`, so the
//! response is piecewise linear in each transition and the fit is continuous.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::Point3;
use crate::mmv::{hull_of, MismatchProblem, MmvError, MmvMethod, MmvResult};
use crate::spectral::{ColourSystem, Reflectance, WavelengthGrid};

pub const MAX_TRANSITIONS: usize = 5;
/// Acceptance threshold on `|Φ(r) − z₀|_∞`, relative to `|z₀|_∞`.
pub const ACCEPT_REL: f64 = 1e-6;

/// Binary step function starting at `0` or `1` and flipping after each
/// transition wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpectrum {
    transitions: Vec<f64>,
    starts_high: bool,
}

impl StepSpectrum {
    /// `None` unless the transitions are finite, strictly increasing and at
    /// most five.
    pub fn new(transitions: Vec<f64>, starts_high: bool) -> Option<Self> {
        if transitions.len() > MAX_TRANSITIONS
            || transitions.iter().any(|t| !t.is_finite())
            || transitions.windows(2).any(|w| w[0] >= w[1])
        {
            return None;
        }
        Some(Self {
            transitions,
            starts_high,
        })
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn starts_high(&self) -> bool {
        self.starts_high
    }

    /// Uniform transition count in `0..=5`, uniform sorted wavelengths and a
    /// fair polarity.
    pub fn random<R: Rng>(grid: &WavelengthGrid, rng: &mut R) -> Self {
        let m = rng.random_range(0..=MAX_TRANSITIONS);
        let starts_high = rng.random_bool(0.5);
        loop {
            let mut t: Vec<f64> = (0..m)
                .map(|_| rng.random_range(grid.lambda_min()..=grid.last()))
                .collect();
            t.sort_by(f64::total_cmp);
            if let Some(s) = Self::new(t, starts_high) {
                return s;
            }
        }
    }
}

/// Binary reflectance: sample `i` is flipped once for every transition
/// strictly below `λ_i`.
pub fn evaluate(s: &StepSpectrum, grid: &WavelengthGrid) -> Reflectance {
    let values = grid
        .wavelengths()
        .map(|l| {
            let flips = s.transitions.iter().filter(|&&t| t < l).count();
            if s.starts_high ^ (flips % 2 == 1) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Reflectance::clamped(*grid, values)
}

/// Values of the continuous evaluation; equals [`evaluate`] when every
/// transition lies on a grid node.
pub fn evaluate_continuous(s: &StepSpectrum, grid: &WavelengthGrid) -> Reflectance {
    let delta = grid.delta();
    let values = grid
        .wavelengths()
        .map(|l| {
            let mut v = if s.starts_high { 1.0 } else { 0.0 };
            let mut rising = !s.starts_high;
            for &t in &s.transitions {
                let h = ((l - t) / delta).clamp(0.0, 1.0);
                v += if rising { h } else { -h };
                rising = !rising;
            }
            v
        })
        .collect();
    Reflectance::clamped(*grid, values)
}

/// Response to a step at continuous wavelengths, via suffix sums.
struct StepResponse<'a> {
    grid: WavelengthGrid,
    /// `suffix[j] = Δλ Σ_{i ≥ j} s_i`, `q + 1` entries of `n` values.
    suffix: Vec<f64>,
    n: usize,
    phi: &'a ColourSystem,
}

impl<'a> StepResponse<'a> {
    fn new(phi: &'a ColourSystem) -> Self {
        let n = phi.sensors();
        let q = phi.samples();
        let delta = phi.grid().delta();
        let mut suffix = vec![0.0; (q + 1) * n];
        for j in (0..q).rev() {
            for c in 0..n {
                suffix[j * n + c] = suffix[(j + 1) * n + c] + delta * phi.get(j, c);
            }
        }
        Self {
            grid: *phi.grid(),
            suffix,
            n,
            phi,
        }
    }

    /// Adds `sign · Δλ Σ_i clamp((λ_i − t)/Δλ, 0, 1) s_i` to `out`.
    fn add_step(&self, t: f64, sign: f64, out: &mut [f64]) {
        let q = self.grid.len();
        let u = ((t - self.grid.lambda_min()) / self.grid.delta()).clamp(0.0, (q - 1) as f64);
        let j = (u.floor() as usize).min(q - 1);
        let f = u - j as f64;
        let n = self.n;
        let delta = self.grid.delta();
        for c in 0..n {
            let mut v = if j + 2 <= q { self.suffix[(j + 2) * n + c] } else { 0.0 };
            if j + 1 < q {
                v += (1.0 - f) * delta * self.phi.get(j + 1, c);
            }
            out[c] += sign * v;
        }
    }

    /// Slope of [`Self::add_step`] in `t`, away from grid nodes.
    fn step_slope(&self, t: f64, sign: f64, out: &mut [f64]) {
        let q = self.grid.len();
        let u = ((t - self.grid.lambda_min()) / self.grid.delta()).clamp(0.0, (q - 1) as f64);
        let j = (u.floor() as usize).min(q - 1);
        for c in 0..self.n {
            out[c] = if j + 1 < q { -sign * self.phi.get(j + 1, c) } else { 0.0 };
        }
    }

    fn respond(&self, t: &[f64], starts_high: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        if starts_high {
            out.copy_from_slice(&self.suffix[..self.n]);
        }
        let mut sign = if starts_high { -1.0 } else { 1.0 };
        for &x in t {
            self.add_step(x, sign, &mut out);
            sign = -sign;
        }
        out
    }
}

/// Outcome of [`fit_to_target`].
#[derive(Debug, Clone)]
pub struct Fit {
    pub spectrum: StepSpectrum,
    /// `|Φ(r) − z₀|_∞` of the continuous evaluation.
    pub residual: f64,
    pub iterations: usize,
    pub accepted: bool,
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn sq_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn canonical(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut t: Vec<f64> = x.iter().map(|v| v.clamp(lo, hi)).collect();
    t.sort_by(f64::total_cmp);
    t
}

/// Minimises `‖Φ(r₅) − z₀‖₂` over the transition wavelengths of `seed`.
///
/// Nelder–Mead with an iteration cap of `200·m`, followed by Gauss–Newton
/// polishing steps on the locally linear response. Neither stage accepts a
/// worse point, so the residual never exceeds the seed's.
pub fn fit_to_target(problem: &MismatchProblem, seed: &StepSpectrum) -> Fit {
    let phi = problem.phi();
    let resp = StepResponse::new(phi);
    fit_with(&resp, problem.z0().values(), seed)
}

fn fit_with(resp: &StepResponse<'_>, z0: &[f64], seed: &StepSpectrum) -> Fit {
    let grid = resp.grid;
    let (lo, hi) = (grid.lambda_min(), grid.last());
    let polarity = seed.starts_high;
    let tol = ACCEPT_REL * z0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cost = |x: &[f64]| sq_norm_diff(&resp.respond(&canonical(x, lo, hi), polarity), z0);

    let m = seed.transitions.len();
    let mut best = seed.transitions.clone();
    let mut best_cost = cost(&best);
    let mut iterations = 0;

    let done = |x: &[f64]| inf_norm_diff(&resp.respond(&canonical(x, lo, hi), polarity), z0) <= tol;

    if m > 0 && !done(&best) {
        // Nelder–Mead on the raw coordinates; evaluation sorts and clamps.
        let step = 0.05 * (hi - lo);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
        simplex.push((best.clone(), best_cost));
        for d in 0..m {
            let mut x = best.clone();
            x[d] += if x[d] + step <= hi { step } else { -step };
            let c = cost(&x);
            simplex.push((x, c));
        }
        let cap = 200 * m;
        while iterations < cap {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1.sqrt() <= tol * 1e-3 {
                break;
            }
            let worst = simplex[m].clone();
            let mut centroid = vec![0.0; m];
            for (x, _) in &simplex[..m] {
                for d in 0..m {
                    centroid[d] += x[d] / m as f64;
                }
            }
            let along = |a: f64| -> Vec<f64> {
                (0..m).map(|d| centroid[d] + a * (worst.0[d] - centroid[d])).collect()
            };
            let xr = along(-1.0);
            let cr = cost(&xr);
            if cr < simplex[0].1 {
                let xe = along(-2.0);
                let ce = cost(&xe);
                simplex[m] = if ce < cr { (xe, ce) } else { (xr, cr) };
            } else if cr < simplex[m - 1].1 {
                simplex[m] = (xr, cr);
            } else {
                let (xc, cc) = if cr < worst.1 {
                    let x = along(-0.5);
                    let c = cost(&x);
                    (x, c)
                } else {
                    let x = along(0.5);
                    let c = cost(&x);
                    (x, c)
                };
                if cc < worst.1.min(cr) {
                    simplex[m] = (xc, cc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for (x, c) in simplex.iter_mut().skip(1) {
                        for d in 0..m {
                            x[d] = x0[d] + 0.5 * (x[d] - x0[d]);
                        }
                        *c = cost(x);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best_cost {
            best = canonical(&simplex[0].0, lo, hi);
            best_cost = simplex[0].1;
        }
        polish(resp, z0, polarity, &mut best, &mut best_cost, lo, hi);
    }

    let transitions = canonical(&best, lo, hi);
    let residual = inf_norm_diff(&resp.respond(&transitions, polarity), z0);
    let spectrum = StepSpectrum::new(transitions.clone(), polarity).unwrap_or_else(|| {
        // Coincident transitions cancel; drop the pairs.
        let mut kept: Vec<f64> = Vec::new();
        for t in transitions {
            if kept.last() == Some(&t) {
                kept.pop();
            } else {
                kept.push(t);
            }
        }
        StepSpectrum::new(kept, polarity).expect("distinct transitions")
    });
    Fit {
        spectrum,
        residual,
        iterations,
        accepted: residual <= tol,
    }
}

/// Least-squares Newton steps on the transitions, exact while every
/// transition stays in its grid cell.
fn polish(resp: &StepResponse<'_>, z0: &[f64], polarity: bool, x: &mut Vec<f64>, c: &mut f64, lo: f64, hi: f64) {
    let m = x.len();
    let n = z0.len();
    for _ in 0..20 {
        let t = canonical(x, lo, hi);
        let r: Vec<f64> = resp.respond(&t, polarity).iter().zip(z0).map(|(a, b)| a - b).collect();
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, m);
        let mut sign = if polarity { -1.0 } else { 1.0 };
        let mut col = vec![0.0; n];
        for (k, &tk) in t.iter().enumerate() {
            resp.step_slope(tk, sign, &mut col);
            for i in 0..n {
                jac[(i, k)] = col[i];
            }
            sign = -sign;
        }
        let svd = jac.svd(true, true);
        let rhs = nalgebra::DVector::from_vec(r.iter().map(|v| -v).collect());
        let Ok(dx) = svd.solve(&rhs, 1e-12) else { return };
        let mut improved = false;
        let mut a = 1.0;
        for _ in 0..8 {
            let trial: Vec<f64> = t.iter().zip(dx.iter()).map(|(v, d)| v + a * d).collect();
            let tc = sq_norm_diff(&resp.respond(&canonical(&trial, lo, hi), polarity), z0);
            if tc < *c {
                *x = canonical(&trial, lo, hi);
                *c = tc;
                improved = true;
                break;
            }
            a *= 0.5;
        }
        if !improved {
            return;
        }
    }
}

/// Seeds for `baseline_mmv`; seed `i` depends only on `(seed, i)`.
pub fn random_seed_spectrum(grid: &WavelengthGrid, seed: u64, index: usize) -> StepSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    StepSpectrum::random(grid, &mut rng)
}

/// Accepted fits among `n_seeds` random seeds, in seed order.
pub fn baseline_fits(problem: &MismatchProblem, n_seeds: usize, seed: u64) -> Vec<Fit> {
    let resp = StepResponse::new(problem.phi());
    let grid = *problem.phi().grid();
    let z0 = problem.z0().values();
    (0..n_seeds)
        .into_par_iter()
        .map(|i| fit_with(&resp, z0, &random_seed_spectrum(&grid, seed, i)))
        .filter(|f| f.accepted)
        .collect()
}

/// Hull of `Ψ(r₅)` over the accepted fits.
pub fn baseline_mmv(problem: &MismatchProblem, n_seeds: usize, seed: u64) -> Result<MmvResult, MmvError> {
    let grid = *problem.phi().grid();
    let fits = baseline_fits(problem, n_seeds, seed);
    let spectra: Vec<Reflectance> = fits
        .iter()
        .map(|f| evaluate_continuous(&f.spectrum, &grid))
        .collect();
    let points: Vec<Point3> = spectra.iter().map(|r| problem.psi_response(r.values())).collect();
    let hull = hull_of(&points)?;
    Ok(MmvResult {
        method: MmvMethod::FiveTransition,
        volume: hull.volume(),
        points,
        spectra,
        hull,
        sample_count: n_seeds,
        wavelength_step: grid.delta(),
        binding_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{judd_vos_system, Illuminant};
    use crate::ocs::count_transitions;
    use crate::spectral::ColourResponse;

    fn grid() -> WavelengthGrid {
        WavelengthGrid::visible(1.0).unwrap()
    }

    fn problem() -> MismatchProblem {
        let g = WavelengthGrid::visible(5.0).unwrap();
        MismatchProblem::flat_grey(
            judd_vos_system(Illuminant::D65, &g).unwrap(),
            judd_vos_system(Illuminant::A, &g).unwrap(),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn no_transitions() {
        let r = evaluate(&StepSpectrum::new(vec![], true).unwrap(), &grid());
        assert!(r.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn single_midpoint_step() {
        let g = grid();
        let mid = g.wavelength(g.len() / 2);
        let s = StepSpectrum::new(vec![mid], false).unwrap();
        let r = evaluate(&s, &g);
        for (i, &v) in r.values().iter().enumerate() {
            assert_eq!(v, if i > g.len() / 2 { 1.0 } else { 0.0 });
        }
        assert_eq!(evaluate_continuous(&s, &g).values(), r.values());
    }

    #[test]
    fn transitions_bounded_by_m() {
        let g = grid();
        for i in 0..200 {
            let s = random_seed_spectrum(&g, 9, i);
            assert!(count_transitions(evaluate(&s, &g).values()) <= s.transitions().len());
        }
    }

    #[test]
    fn invalid_step_spectra() {
        assert!(StepSpectrum::new(vec![500.0, 500.0], false).is_none());
        assert!(StepSpectrum::new(vec![500.0, 400.0], false).is_none());
        assert!(StepSpectrum::new(vec![400.0, 450.0, 500.0, 550.0, 600.0, 650.0], false).is_none());
    }

    #[test]
    fn suffix_response_matches_direct() {
        let p = problem();
        let resp = StepResponse::new(p.phi());
        let s = StepSpectrum::new(vec![432.3, 501.0, 611.7], true).unwrap();
        let direct = p.phi().respond_values(evaluate_continuous(&s, p.phi().grid()).values());
        let fast = resp.respond(s.transitions(), true);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn exact_seed_is_kept() {
        let g = WavelengthGrid::visible(5.0).unwrap();
        let phi = judd_vos_system(Illuminant::D65, &g).unwrap();
        let psi = judd_vos_system(Illuminant::A, &g).unwrap();
        let seed = StepSpectrum::new(vec![450.0, 520.0, 600.0], false).unwrap();
        let z0 = ColourResponse(phi.respond_values(evaluate(&seed, &g).values()));
        let p = MismatchProblem::new(phi, psi, z0).unwrap();
        let fit = fit_to_target(&p, &seed);
        assert!(fit.residual <= 1e-12 * p.z0().max_abs());
        assert_eq!(fit.spectrum, seed);
    }

    #[test]
    fn fits_never_get_worse() {
        let p = problem();
        let resp = StepResponse::new(p.phi());
        let z0 = p.z0().values();
        for i in 0..100 {
            let seed = random_seed_spectrum(p.phi().grid(), 4, i);
            let before = inf_norm_diff(&resp.respond(seed.transitions(), seed.starts_high()), z0);
            let fit = fit_to_target(&p, &seed);
            let before2 = sq_norm_diff(&resp.respond(seed.transitions(), seed.starts_high()), z0);
            let after2 = sq_norm_diff(&resp.respond(fit.spectrum.transitions(), fit.spectrum.starts_high()), z0);
            assert!(after2 <= before2, "{i}: {before} -> {}", fit.residual);
        }
    }

    #[test]
    fn accepted_fits_hit_target() {
        let p = problem();
        let fits = baseline_fits(&p, 300, 1);
        assert!(!fits.is_empty());
        let tol = ACCEPT_REL * p.z0().max_abs();
        for f in &fits {
            let r = evaluate_continuous(&f.spectrum, p.phi().grid());
            assert!(inf_norm_diff(&p.phi().respond_values(r.values()), p.z0().values()) <= tol * (1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_seeds_is_degenerate() {
        assert!(baseline_mmv(&problem(), 0, 1).unwrap_err().is_degenerate());
    }
}
