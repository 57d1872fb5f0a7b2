//! Bounded-variable primal simplex for
//!
//! ```text
//! maximize cᵀr  subject to  Aᵀr = z₀,  0 ≤ r ≤ 1
//! ```
//!
//! with `A` a `q × N` table and `N` small (three to six equality rows). The
//! basis is refactored from scratch every major iteration, which costs
//! `O(N³)` and keeps round-off from accumulating. Pricing is Dantzig's rule;
//! all improving bound flips found in one pricing pass are applied before the
//! next pivot, since flips leave the duals unchanged. After `50·q`
//! consecutive degenerate pivots the solver switches to Bland's rule.

use thiserror::Error;

/// Fraction bound for [`LpSolution::basis_fractional_count`].
pub const FRACTIONAL_DELTA: f64 = 1e-7;
/// Equality tolerance, relative to `|z₀|∞`.
pub const EQ_TOL: f64 = 1e-8;
/// Bound violation accepted before clipping.
pub const BOUND_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("equality constraints are infeasible (phase-1 residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("internal solver error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `maximize cᵀr s.t. Aᵀr = z₀, r ∈ [0,1]^q`. `eq_matrix` is row-major
/// `q × N`: row `j` holds the coefficients of variable `r_j`.
#[derive(Debug, Clone)]
pub struct BoxedLp {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<f64>,
    pub eq_rhs: Vec<f64>,
}

impl BoxedLp {
    pub fn new(objective: Vec<f64>, eq_matrix: Vec<f64>, eq_rhs: Vec<f64>) -> Result<Self, LpError> {
        let lp = Self {
            objective,
            eq_matrix,
            eq_rhs,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> usize {
        self.eq_rhs.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let (q, n) = (self.vars(), self.rows());
        if self.eq_matrix.len() != q * n {
            return Err(LpError::Malformed(format!(
                "constraint table has {} entries, expected {q} × {n}",
                self.eq_matrix.len()
            )));
        }
        if n > q {
            return Err(LpError::Malformed(format!("{n} equality rows exceed {q} variables")));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.objective) && finite(&self.eq_matrix) && finite(&self.eq_rhs)) {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// `Aᵀr`.
    pub fn constraint_values(&self, r: &[f64]) -> Vec<f64> {
        let n = self.rows();
        let mut out = vec![0.0; n];
        for (row, &rj) in self.eq_matrix.chunks_exact(n.max(1)).zip(r) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * rj;
            }
        }
        out
    }

    /// `|Aᵀr − z₀|∞`.
    pub fn residual(&self, r: &[f64]) -> f64 {
        self.constraint_values(r)
            .iter()
            .zip(&self.eq_rhs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn eq_tolerance(&self) -> f64 {
        let zmax = self.eq_rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if zmax > 0.0 {
            EQ_TOL * zmax
        } else {
            EQ_TOL * self.eq_matrix.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0)
        }
    }
}

/// Opaque warm-start basis for LPs sharing the same constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisToken {
    basic: Vec<usize>,
    at_upper: Vec<bool>,
    artificial_sign: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub r: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    /// Entries strictly inside `(δ, 1 − δ)`.
    pub basis_fractional_count: usize,
    /// Equality-row multipliers `y`; the dual bound is
    /// `y·z₀ + Σ_j max(0, c_j − y·a_j)`.
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    pub residual: f64,
    pub basis: Option<BasisToken>,
    pub iterations: usize,
}

impl LpSolution {
    fn infeasible(residual: f64, iterations: usize) -> Self {
        Self {
            r: Vec::new(),
            objective_value: f64::NAN,
            status: LpStatus::Infeasible,
            basis_fractional_count: 0,
            duals: Vec::new(),
            dual_objective: f64::NAN,
            residual,
            basis: None,
            iterations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeasiblePoint {
    pub r: Vec<f64>,
    pub basis: BasisToken,
}

/// Optimal basic solution of `lp`.
pub fn solve(lp: &BoxedLp) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let mut s = Simplex::new(lp);
    if let Some(res) = s.phase_one()? {
        return Ok(LpSolution::infeasible(res, s.iterations));
    }
    s.phase_two(&lp.objective)?;
    Ok(s.solution(lp))
}

/// Solves starting from `token`, falling back to a cold start when the token's
/// basis is singular or infeasible for `lp`'s constraints.
pub fn solve_warm(lp: &BoxedLp, token: &BasisToken) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let mut s = Simplex::new(lp);
    if !s.load(token)? {
        return solve(lp);
    }
    s.phase_two(&lp.objective)?;
    Ok(s.solution(lp))
}

/// Any `r ∈ [0,1]^q` meeting the equalities, with the basis that produced it.
pub fn feasible_point(lp: &BoxedLp) -> Result<FeasiblePoint, LpError> {
    lp.validate()?;
    let mut s = Simplex::new(lp);
    if let Some(residual) = s.phase_one()? {
        return Err(LpError::Infeasible { residual });
    }
    let r = s.primal();
    Ok(FeasiblePoint {
        r,
        basis: s.token(),
    })
}

struct Simplex {
    q: usize,
    n: usize,
    /// Row-scaled columns, `(q + n) × n`; artificial columns last.
    cols: Vec<f64>,
    rhs: Vec<f64>,
    row_scale: Vec<f64>,
    artificial_sign: Vec<f64>,
    upper: Vec<f64>,
    basic: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    binv: Vec<f64>,
    x_b: Vec<f64>,
    feas_tol: f64,
    iterations: usize,
}

impl Simplex {
    fn new(lp: &BoxedLp) -> Self {
        let (q, n) = (lp.vars(), lp.rows());
        let mut row_scale = vec![1.0; n];
        for (i, s) in row_scale.iter_mut().enumerate() {
            let m = (0..q).fold(0.0_f64, |m, j| m.max(lp.eq_matrix[j * n + i].abs()));
            *s = if m > 0.0 { 1.0 / m } else { 1.0 };
        }
        let rhs: Vec<f64> = lp.eq_rhs.iter().zip(&row_scale).map(|(z, s)| z * s).collect();
        let artificial_sign: Vec<f64> = rhs.iter().map(|&z| if z < 0.0 { -1.0 } else { 1.0 }).collect();

        let mut cols = vec![0.0; (q + n) * n];
        for j in 0..q {
            for i in 0..n {
                cols[j * n + i] = lp.eq_matrix[j * n + i] * row_scale[i];
            }
        }
        for i in 0..n {
            cols[(q + i) * n + i] = artificial_sign[i];
        }
        let rhs_max = rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut upper = vec![1.0; q + n];
        upper[q..].iter_mut().for_each(|u| *u = f64::INFINITY);

        Self {
            q,
            n,
            cols,
            rhs,
            row_scale,
            artificial_sign,
            upper,
            basic: Vec::new(),
            is_basic: vec![false; q + n],
            at_upper: vec![false; q + n],
            binv: vec![0.0; n * n],
            x_b: vec![0.0; n],
            feas_tol: 1e-10 * rhs_max,
            iterations: 0,
        }
    }

    fn col(&self, v: usize) -> &[f64] {
        &self.cols[v * self.n..(v + 1) * self.n]
    }

    fn is_artificial(&self, v: usize) -> bool {
        v >= self.q
    }

    fn lower_artificial_bounds(&mut self) {
        let q = self.q;
        self.upper[q..].iter_mut().for_each(|u| *u = 0.0);
    }

    /// Inverts the basis matrix; `false` when it is numerically singular.
    fn refactor(&mut self) -> bool {
        let n = self.n;
        if n == 0 {
            return true;
        }
        let mut m = vec![0.0; n * 2 * n];
        for (c, &v) in self.basic.iter().enumerate() {
            for r in 0..n {
                m[r * 2 * n + c] = self.cols[v * n + r];
            }
        }
        for r in 0..n {
            m[r * 2 * n + n + r] = 1.0;
        }
        for c in 0..n {
            let p = (c..n)
                .max_by(|&a, &b| m[a * 2 * n + c].abs().total_cmp(&m[b * 2 * n + c].abs()))
                .unwrap();
            if m[p * 2 * n + c].abs() < 1e-13 {
                return false;
            }
            if p != c {
                for k in 0..2 * n {
                    m.swap(p * 2 * n + k, c * 2 * n + k);
                }
            }
            let d = m[c * 2 * n + c];
            for k in 0..2 * n {
                m[c * 2 * n + k] /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = m[r * 2 * n + c];
                    if f != 0.0 {
                        for k in 0..2 * n {
                            m[r * 2 * n + k] -= f * m[c * 2 * n + k];
                        }
                    }
                }
            }
        }
        for r in 0..n {
            for c in 0..n {
                self.binv[r * n + c] = m[r * 2 * n + n + c];
            }
        }
        true
    }

    fn compute_xb(&mut self) {
        let n = self.n;
        let mut b = self.rhs.clone();
        for v in 0..self.q + n {
            if !self.is_basic[v] && self.at_upper[v] {
                let u = self.upper[v];
                for (bi, a) in b.iter_mut().zip(self.col(v)) {
                    *bi -= u * a;
                }
            }
        }
        for r in 0..n {
            self.x_b[r] = (0..n).map(|c| self.binv[r * n + c] * b[c]).sum();
        }
    }

    fn ftran(&self, v: usize) -> Vec<f64> {
        let n = self.n;
        let a = self.col(v);
        (0..n)
            .map(|r| (0..n).map(|c| self.binv[r * n + c] * a[c]).sum())
            .collect()
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|k| cost[self.basic[k]] * self.binv[k * n + i]).sum())
            .collect()
    }

    /// Starts from all-zero structurals with the artificials basic and
    /// minimises their sum. Returns the residual when infeasible.
    fn phase_one(&mut self) -> Result<Option<f64>, LpError> {
        let (q, n) = (self.q, self.n);
        self.basic = (q..q + n).collect();
        for v in q..q + n {
            self.is_basic[v] = true;
        }
        let mut cost = vec![0.0; q + n];
        cost[q..].iter_mut().for_each(|c| *c = -1.0);
        self.iterate(&cost)?;

        let infeas: f64 = self
            .basic
            .iter()
            .zip(&self.x_b)
            .filter(|(&v, _)| self.is_artificial(v))
            .map(|(_, x)| x.abs())
            .sum();
        if infeas > self.feas_tol.max(1e-9) * (n as f64).max(1.0) {
            let unscaled = self
                .basic
                .iter()
                .zip(&self.x_b)
                .filter(|(&v, _)| self.is_artificial(v))
                .map(|(&v, x)| x.abs() / self.row_scale[v - q])
                .fold(0.0, f64::max);
            return Ok(Some(unscaled));
        }
        self.drive_out_artificials();
        self.lower_artificial_bounds();
        Ok(None)
    }

    /// Degenerate pivots replacing zero-valued basic artificials by
    /// structural columns where possible.
    fn drive_out_artificials(&mut self) {
        for k in 0..self.n {
            if !self.is_artificial(self.basic[k]) {
                continue;
            }
            let n = self.n;
            let row: Vec<f64> = self.binv[k * n..(k + 1) * n].to_vec();
            let best = (0..self.q)
                .filter(|&v| !self.is_basic[v])
                .map(|v| (v, self.col(v).iter().zip(&row).map(|(a, b)| a * b).sum::<f64>()))
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
            if let Some((v, alpha)) = best {
                if alpha.abs() > 1e-9 {
                    let leaving = self.basic[k];
                    self.is_basic[leaving] = false;
                    self.at_upper[leaving] = false;
                    self.is_basic[v] = true;
                    self.basic[k] = v;
                    // v keeps its bound value, now as a basic variable.
                    self.at_upper[v] = false;
                    if self.refactor() {
                        continue;
                    }
                    // Undo on a singular result.
                    self.basic[k] = leaving;
                    self.is_basic[v] = false;
                    self.is_basic[leaving] = true;
                    let _ = self.refactor();
                }
            }
        }
        let _ = self.refactor();
        self.compute_xb();
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<(), LpError> {
        let mut cost = objective.to_vec();
        cost.resize(self.q + self.n, 0.0);
        self.iterate(&cost)
    }

    fn load(&mut self, token: &BasisToken) -> Result<bool, LpError> {
        if token.basic.len() != self.n
            || token.at_upper.len() != self.q + self.n
            || token.artificial_sign != self.artificial_sign
        {
            return Ok(false);
        }
        self.basic = token.basic.clone();
        self.at_upper = token.at_upper.clone();
        self.is_basic = vec![false; self.q + self.n];
        for &v in &self.basic {
            self.is_basic[v] = true;
        }
        self.lower_artificial_bounds();
        if !self.refactor() {
            return Ok(false);
        }
        self.compute_xb();
        let tol = self.feas_tol.max(1e-9);
        let feasible = self
            .basic
            .iter()
            .zip(&self.x_b)
            .all(|(&v, &x)| x >= -tol && x <= self.upper[v] + tol);
        Ok(feasible)
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<(), LpError> {
        let total = self.q + self.n;
        let cmax = cost.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if cmax == 0.0 {
            if !self.refactor() {
                return Err(LpError::Internal("singular starting basis".into()));
            }
            self.compute_xb();
            return Ok(());
        }
        let dtol = 1e-11 * cmax;
        let max_major = 20 * (total + 10);
        let degenerate_limit = 50 * self.q.max(1);
        let mut degenerate_run = 0usize;
        let mut bland = false;

        for _ in 0..max_major {
            self.iterations += 1;
            if !self.refactor() {
                return Err(LpError::Internal("basis became singular".into()));
            }
            self.compute_xb();
            let y = self.duals(cost);

            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            for v in 0..total {
                if self.is_basic[v] || self.upper[v] <= 0.0 {
                    continue;
                }
                let d = cost[v] - self.col(v).iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
                if !self.at_upper[v] && d > dtol {
                    candidates.push((v, 1.0, d));
                } else if self.at_upper[v] && d < -dtol {
                    candidates.push((v, -1.0, d));
                }
            }
            if candidates.is_empty() {
                return Ok(());
            }
            if bland {
                candidates.truncate(1);
            } else {
                candidates.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then(a.0.cmp(&b.0)));
            }

            for &(v, dir, _) in &candidates {
                let w = self.ftran(v);
                let wmax = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                let ptol = PIVOT_TOL * wmax.max(1.0);
                let mut theta = f64::INFINITY;
                let mut leave: Option<(usize, bool)> = None;
                let mut leave_mag = 0.0;
                for k in 0..self.n {
                    let delta = dir * w[k];
                    let bvar = self.basic[k];
                    let (lim, to_upper) = if delta > ptol {
                        ((self.x_b[k]).max(0.0) / delta, false)
                    } else if delta < -ptol && self.upper[bvar].is_finite() {
                        ((self.upper[bvar] - self.x_b[k]).max(0.0) / -delta, true)
                    } else {
                        continue;
                    };
                    let better = match leave {
                        None => true,
                        Some((lk, _)) => {
                            if bland {
                                lim < theta - 1e-15 || (lim <= theta + 1e-15 && bvar < self.basic[lk])
                            } else {
                                lim < theta - 1e-12 * theta.max(1.0)
                                    || (lim <= theta + 1e-12 * theta.max(1.0) && delta.abs() > leave_mag)
                            }
                        }
                    };
                    if better {
                        theta = lim;
                        leave = Some((k, to_upper));
                        leave_mag = delta.abs();
                    }
                }

                let own = self.upper[v];
                if own <= theta {
                    // Bound flip.
                    for k in 0..self.n {
                        self.x_b[k] -= dir * own * w[k];
                    }
                    self.at_upper[v] = !self.at_upper[v];
                    degenerate_run = 0;
                    if bland {
                        break;
                    }
                    continue;
                }
                let Some((k, to_upper)) = leave else {
                    return Err(LpError::Internal("unbounded direction in a box-bounded LP".into()));
                };
                let leaving = self.basic[k];
                self.is_basic[leaving] = false;
                self.at_upper[leaving] = to_upper;
                self.is_basic[v] = true;
                self.at_upper[v] = false;
                self.basic[k] = v;
                if theta <= DEGENERATE_STEP {
                    degenerate_run += 1;
                    if degenerate_run > degenerate_limit {
                        bland = true;
                    }
                } else {
                    degenerate_run = 0;
                }
                break;
            }
        }
        Err(LpError::Internal(format!("no convergence after {max_major} major iterations")))
    }

    fn primal(&self) -> Vec<f64> {
        let mut r: Vec<f64> = (0..self.q)
            .map(|v| if self.at_upper[v] { self.upper[v] } else { 0.0 })
            .collect();
        for (&v, &x) in self.basic.iter().zip(&self.x_b) {
            if v < self.q {
                r[v] = x.clamp(0.0, 1.0);
            }
        }
        r
    }

    fn token(&self) -> BasisToken {
        BasisToken {
            basic: self.basic.clone(),
            at_upper: self.at_upper.clone(),
            artificial_sign: self.artificial_sign.clone(),
        }
    }

    fn solution(&self, lp: &BoxedLp) -> LpSolution {
        let r = self.primal();
        let objective_value = r.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        let mut cost = lp.objective.clone();
        cost.resize(self.q + self.n, 0.0);
        let scaled = self.duals(&cost);
        let duals: Vec<f64> = scaled.iter().zip(&self.row_scale).map(|(y, s)| y * s).collect();
        let n = self.n;
        let mut dual_objective: f64 = duals.iter().zip(&lp.eq_rhs).map(|(y, z)| y * z).sum();
        for j in 0..self.q {
            let a = &lp.eq_matrix[j * n..(j + 1) * n];
            let d = lp.objective[j] - a.iter().zip(&duals).map(|(x, y)| x * y).sum::<f64>();
            dual_objective += d.max(0.0);
        }
        let basis_fractional_count = r
            .iter()
            .filter(|&&x| x > FRACTIONAL_DELTA && x < 1.0 - FRACTIONAL_DELTA)
            .count();
        LpSolution {
            residual: lp.residual(&r),
            r,
            objective_value,
            status: LpStatus::Optimal,
            basis_fractional_count,
            duals,
            dual_objective,
            basis: Some(self.token()),
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lp(rng: &mut ChaCha8Rng, q: usize, n: usize) -> (BoxedLp, Vec<f64>) {
        let a: Vec<f64> = (0..q * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let c: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r_star: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut lp = BoxedLp::new(c, a, vec![0.0; n]).unwrap();
        lp.eq_rhs = lp.constraint_values(&r_star);
        (lp, r_star)
    }

    #[test]
    fn no_rows_reduces_to_sign_rule() {
        let c = vec![1.5, -2.0, 0.3, -0.1, 4.0];
        let sol = solve(&BoxedLp::new(c.clone(), vec![], vec![]).unwrap()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let want: Vec<f64> = c.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect();
        assert_eq!(sol.r, want);
        assert!((sol.objective_value - 5.8).abs() < 1e-12);
    }

    #[test]
    fn half_start_is_improved() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (q, n) = (30, 3);
        let a: Vec<f64> = (0..q * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let c: Vec<f64> = (0..q).map(|j| a[j * n]).collect();
        let mut lp = BoxedLp::new(c.clone(), a, vec![0.0; n]).unwrap();
        lp.eq_rhs = lp.constraint_values(&vec![0.5; q]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective_value >= c.iter().sum::<f64>() * 0.5 - 1e-12);
        assert!(sol.residual <= lp.eq_tolerance());
        assert!(sol.basis_fractional_count <= n);
    }

    #[test]
    fn feasible_point_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (q, n) = (25, 3);
        let a: Vec<f64> = (0..q * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut lp = BoxedLp::new(vec![0.0; q], a, vec![0.0; n]).unwrap();
        lp.eq_rhs = lp.constraint_values(&vec![0.3; q]);
        let fp = feasible_point(&lp).unwrap();
        assert!(lp.residual(&fp.r) <= lp.eq_tolerance());
        assert!(fp.r.iter().all(|x| (0.0..=1.0).contains(x)));

        let white = lp.constraint_values(&vec![1.0; q]);
        lp.eq_rhs = white.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(feasible_point(&lp), Err(LpError::Infeasible { .. })));
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn random_feasible_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (lp, _) = random_lp(&mut rng, 40, 3);
            let fp = feasible_point(&lp).unwrap();
            assert!(lp.residual(&fp.r) <= lp.eq_tolerance());
        }
    }

    #[test]
    fn duality_gap_and_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 3, 6] {
            for _ in 0..40 {
                let (lp, _) = random_lp(&mut rng, 60, n);
                let sol = solve(&lp).unwrap();
                assert_eq!(sol.status, LpStatus::Optimal);
                assert!(sol.basis_fractional_count <= n);
                assert!(sol.residual <= lp.eq_tolerance(), "{} > {}", sol.residual, lp.eq_tolerance());
                let gap = (sol.dual_objective - sol.objective_value).abs();
                assert!(gap <= 1e-7 * sol.objective_value.abs().max(1.0), "gap {gap}");
            }
        }
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut lp, _) = random_lp(&mut rng, 80, 3);
        let token = feasible_point(&lp).unwrap().basis;
        for _ in 0..20 {
            lp.objective = (0..80).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cold = solve(&lp).unwrap();
            let warm = solve_warm(&lp, &token).unwrap();
            assert!((cold.objective_value - warm.objective_value).abs() <= 1e-9 * cold.objective_value.abs().max(1.0));
        }
    }

    #[test]
    fn objective_scaling_keeps_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (lp, _) = random_lp(&mut rng, 50, 3);
        let base = solve(&lp).unwrap();
        let mut scaled = lp.clone();
        scaled.objective.iter_mut().for_each(|c| *c *= 7.5);
        let sol = solve(&scaled).unwrap();
        assert!((sol.objective_value - 7.5 * base.objective_value).abs() <= 1e-9 * sol.objective_value.abs());
        for (a, b) in sol.r.iter().zip(&base.r) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn degenerate_duplicate_columns() {
        // Many identical variables produce ties in every ratio test.
        let q = 40;
        let a: Vec<f64> = (0..q).flat_map(|j| [1.0, (j % 4) as f64]).collect();
        let c: Vec<f64> = (0..q).map(|j| ((j % 5) as f64 - 2.0).abs()).collect();
        let mut lp = BoxedLp::new(c, a, vec![0.0; 2]).unwrap();
        lp.eq_rhs = lp.constraint_values(&vec![0.5; q]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.residual <= lp.eq_tolerance());
        assert!((sol.dual_objective - sol.objective_value).abs() < 1e-7 * sol.objective_value.max(1.0));
    }

    #[test]
    fn malformed_rejected() {
        assert!(BoxedLp::new(vec![1.0, 2.0], vec![1.0], vec![0.0]).is_err());
        assert!(BoxedLp::new(vec![1.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(BoxedLp::new(vec![f64::NAN], vec![1.0], vec![0.0]).is_err());
    }
}
