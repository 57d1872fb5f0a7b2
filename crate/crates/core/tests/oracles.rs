mod oracle;

use mmv_core::data::{judd_vos_system, Illuminant};
use mmv_core::geometry::{convex_hull, halfspace_intersection, Halfspace3, Point3};
use mmv_core::lp::{self, BoxedLp, LpStatus};
use mmv_core::mmv::{mmv_halfspace_nested, mmv_lp, MismatchProblem};
use mmv_core::ocs::optimal_reflectance;
use mmv_core::spectral::{orthonormalize, stack, ColourResponse, ColourSystem, WavelengthGrid};
use mmv_core::sphere::sample_sphere;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_system(rng: &mut ChaCha8Rng, q: usize, n: usize) -> ColourSystem {
    let grid = WavelengthGrid::new(400.0, 400.0 + 10.0 * (q - 1) as f64, 10.0).unwrap();
    let cols: Vec<Vec<f64>> = (0..n).map(|_| (0..q).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    ColourSystem::from_columns(grid, &cols).unwrap()
}

fn table(sys: &ColourSystem) -> Vec<f64> {
    sys.rows().flatten().copied().collect()
}

#[test]
fn ocs_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [6, 10, 14] {
        let sys = toy_system(&mut rng, q, 3);
        let t = table(&sys);
        for k in sample_sphere(3, 200, q as u64).iter() {
            let fast = optimal_reflectance(&sys, &k);
            assert_eq!(fast.values(), oracle::brute_force_ocs(&t, q, 3, &k).as_slice());
        }
    }
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (q, n) = (10, 2);
    for trial in 0..30 {
        let sys = toy_system(&mut rng, q, n);
        let a = table(&sys);
        let r0: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0)).collect();
        let z: Vec<f64> = (0..n).map(|i| (0..q).map(|j| a[j * n + i] * r0[j]).sum()).collect();
        let verts = oracle::basic_solutions(&a, q, n, &z, 1e-10);
        assert!(!verts.is_empty());
        for _ in 0..5 {
            let c: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..1.0)).collect();
            let best = verts
                .iter()
                .map(|r| r.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let sol = lp::solve(&BoxedLp::new(c, a.clone(), z.clone()).unwrap()).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!(
                (sol.objective_value - best).abs() <= 1e-9 * best.abs().max(1.0),
                "trial {trial}: {} vs {best}",
                sol.objective_value
            );
            assert!(sol.basis_fractional_count <= n);
        }
    }
}

#[test]
fn halfspace_intersection_matches_plane_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100 {
        let m = rng.random_range(4..=36);
        // A tetrahedral frame keeps every instance bounded.
        let mut normals: Vec<Point3> = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        for k in sample_sphere(3, m, 100 + trial).iter() {
            normals.push([k[0], k[1], k[2]]);
        }
        let offsets: Vec<f64> = normals
            .iter()
            .map(|n| rng.random_range(0.5..2.0) * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt())
            .collect();
        let hs: Vec<Halfspace3> = normals
            .iter()
            .zip(&offsets)
            .map(|(n, &b)| Halfspace3::new(*n, b).unwrap())
            .collect();
        let poly = halfspace_intersection(&hs).unwrap();
        let want = oracle::enumerate_vertices(&normals, &offsets, 1e-9);
        let got = poly.hull.vertices();
        assert_eq!(got.len(), want.len(), "trial {trial}");
        for v in got {
            assert!(want.iter().any(|w| oracle::dist(v, w) <= 1e-7), "trial {trial}: stray {v:?}");
        }
        for w in &want {
            assert!(got.iter().any(|v| oracle::dist(v, w) <= 1e-7), "trial {trial}: missing {w:?}");
        }
    }
}

#[test]
fn unit_cube_volume() {
    let mut pts = Vec::new();
    for i in 0..8 {
        pts.push([f64::from(i & 1), f64::from(i >> 1 & 1), f64::from(i >> 2 & 1)]);
    }
    assert!((convex_hull(&pts).unwrap().volume() - 1.0).abs() <= 1e-12);
}

#[test]
fn whitepoints_match_exact_sums() {
    let grid = WavelengthGrid::visible(1.0).unwrap();
    for (name, want) in oracle::WHITEPOINTS {
        let sys = judd_vos_system(name.parse().unwrap(), &grid).unwrap();
        let got = sys.respond_values(&vec![1.0; grid.len()]);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12 * w, "{name}: {g} vs {w}");
        }
    }
}

#[test]
fn stacked_singular_value_ratio() {
    let grid = WavelengthGrid::visible(1.0).unwrap();
    let s = stack(
        &judd_vos_system(Illuminant::D65, &grid).unwrap(),
        &judd_vos_system(Illuminant::A, &grid).unwrap(),
    )
    .unwrap();
    let sv = orthonormalize(&s).unwrap().singular_values;
    let ratio = sv[5] / sv[0];
    assert!(ratio > 1e-2 / 3.0 && ratio < 3e-2, "ratio {ratio}");
}

/// Exact mismatch volume of a toy system: the `Ψ` image of every vertex of the
/// metamer polytope, hulled.
#[test]
fn toy_slice_bracketed_by_both_methods() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q = 9;
    let phi = toy_system(&mut rng, q, 3);
    let psi = toy_system(&mut rng, q, 3);
    let z0 = ColourResponse(phi.respond_values(&vec![0.5; q]));
    let a: Vec<f64> = table(&phi).iter().map(|v| v * phi.grid().delta()).collect();
    let verts = oracle::basic_solutions(&a, q, 3, z0.values(), 1e-10);
    let exact_pts: Vec<Point3> = verts
        .iter()
        .map(|r| {
            let z = psi.respond_values(r);
            [z[0], z[1], z[2]]
        })
        .collect();
    let exact = convex_hull(&exact_pts).unwrap().volume();

    let p = MismatchProblem::new(phi, psi, z0).unwrap();
    let dirs = sample_sphere(6, 200_000, 7);
    let lp_vol = mmv_lp(&p, &dirs.prefix(4000), true).unwrap().volume;
    assert!(lp_vol <= exact * (1.0 + 1e-9), "{lp_vol} > {exact}");
    assert!(lp_vol >= 0.97 * exact, "LP {lp_vol} vs exact {exact}");
    // The outer bound tightens slowly in six dimensions.
    let hs = mmv_halfspace_nested(&p, &dirs, true, &[2_000, 20_000, 200_000]).unwrap();
    for w in hs.windows(2) {
        assert!(w[1].volume <= w[0].volume * (1.0 + 1e-9));
    }
    for r in &hs {
        assert!(r.volume >= exact * (1.0 - 1e-9), "{} < {exact}", r.volume);
    }
}
