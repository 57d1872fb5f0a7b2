//! Brute-force reference implementations used by the integration and
//! acceptance tests. Everything here is deliberately naive.
#![allow(dead_code, clippy::needless_range_loop)]

use mmv_core::geometry::Point3;

/// `max k·Φ(r)` over all binary `r`, with `table` row-major `q × n`. Ties keep
/// the first maximiser in lexicographic bit order, so callers should use
/// generic directions.
pub fn brute_force_ocs(table: &[f64], q: usize, n: usize, k: &[f64]) -> Vec<f64> {
    assert!(q <= 20);
    let proj: Vec<f64> = (0..q)
        .map(|j| (0..n).map(|i| table[j * n + i] * k[i]).sum())
        .collect();
    let mut best_mask = 0u32;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << q) {
        let v: f64 = (0..q).filter(|j| mask >> j & 1 == 1).map(|j| proj[j]).sum();
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    (0..q).map(|j| f64::from(best_mask >> j & 1)).collect()
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All basic feasible solutions of `{r ∈ [0,1]^q : Aᵀr = z}` (`A` row-major
/// `q × n`): choose `n` free entries, fix the rest at 0 or 1, solve.
pub fn basic_solutions(a: &[f64], q: usize, n: usize, z: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for free in combinations(q, n) {
        let fixed: Vec<usize> = (0..q).filter(|j| !free.contains(j)).collect();
        for mask in 0u32..(1 << fixed.len()) {
            let mut r = vec![0.0; q];
            for (b, &j) in fixed.iter().enumerate() {
                r[j] = f64::from(mask >> b & 1);
            }
            let rhs: Vec<f64> = (0..n)
                .map(|i| z[i] - (0..q).map(|j| a[j * n + i] * r[j]).sum::<f64>())
                .collect();
            let m: Vec<Vec<f64>> = (0..n).map(|i| free.iter().map(|&j| a[j * n + i]).collect()).collect();
            let Some(x) = solve_dense(m, rhs) else { continue };
            if x.iter().all(|&v| v >= -tol && v <= 1.0 + tol) {
                for (&j, &v) in free.iter().zip(&x) {
                    r[j] = v.clamp(0.0, 1.0);
                }
                out.push(r);
            }
        }
    }
    out
}

/// Vertices of `∩ {nᵢ·x ≤ bᵢ}` from every triple of planes.
pub fn enumerate_vertices(normals: &[Point3], offsets: &[f64], tol: f64) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::new();
    for t in combinations(normals.len(), 3) {
        let m: Vec<Vec<f64>> = t.iter().map(|&i| normals[i].to_vec()).collect();
        let rhs: Vec<f64> = t.iter().map(|&i| offsets[i]).collect();
        let Some(x) = solve_dense(m, rhs) else { continue };
        let p = [x[0], x[1], x[2]];
        let feasible = normals
            .iter()
            .zip(offsets)
            .all(|(n, b)| n[0] * p[0] + n[1] * p[1] + n[2] * p[2] <= b + tol);
        if feasible && !out.iter().any(|q| dist(q, &p) <= 1e-7) {
            out.push(p);
        }
    }
    out
}

pub fn dist(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Whitepoints `Δλ Σ x̄ e` on the 1 nm 380–730 nm grid, computed once in exact
/// rational arithmetic from the bundled tables.
pub const WHITEPOINTS: [(&str, [f64; 3]); 3] = [
    ("D65", [1.002159605147519e4, 1.062667452604814e4, 1.106515524069371e4]),
    ("A", [1.175829188307953e4, 1.080371148908869e4, 3.611791925345083e3]),
    ("F11", [1.4662954209638e3, 1.46896582302398e3, 8.880837151050026e2]),
];
