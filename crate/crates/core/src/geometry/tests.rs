use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube_corners() -> Vec<Point3> {
    let mut v = Vec::new();
    for x in [0.0, 1.0] {
        for y in [0.0, 1.0] {
            for z in [0.0, 1.0] {
                v.push([x, y, z]);
            }
        }
    }
    v
}

#[test]
fn cube_with_centroid() {
    let mut pts = cube_corners();
    pts.push([0.5, 0.5, 0.5]);
    let h = convex_hull(&pts).unwrap();
    assert_eq!(h.vertices().len(), 8);
    assert_eq!(h.faces().len(), 12);
    assert_eq!(h.euler_characteristic(), 2);
    assert!((h.volume() - 1.0).abs() <= 1e-12);
}

#[test]
fn tetrahedron() {
    let s = 1.0 / 2f64.sqrt();
    let pts = vec![[1.0, 0.0, -s], [-1.0, 0.0, -s], [0.0, 1.0, s], [0.0, -1.0, s]];
    let h = convex_hull(&pts).unwrap();
    assert_eq!(h.vertices().len(), 4);
    assert_eq!(h.faces().len(), 4);
    // Edge length 2 → volume 8 / (6√2).
    let want = 8.0 / (6.0 * 2f64.sqrt());
    assert!((h.volume() - want).abs() <= 1e-12);
}

#[test]
fn outward_normals() {
    let h = convex_hull(&cube_corners()).unwrap();
    let c = h.centroid();
    for (n, o) in h.face_normals().iter().zip(h.face_offsets()) {
        assert!(dot3(n, &c) < *o);
    }
}

#[test]
fn degenerate_inputs() {
    assert!(matches!(convex_hull(&[[0.0; 3]; 3]), Err(GeometryError::TooFewPoints(3))));
    let flat: Vec<Point3> = (0..10).map(|i| [i as f64, (i * i) as f64, 0.0]).collect();
    assert!(matches!(
        convex_hull(&flat),
        Err(GeometryError::Degenerate { kind: Degeneracy::Coplanar })
    ));
    let line: Vec<Point3> = (0..10).map(|i| [i as f64, 2.0 * i as f64, 0.5 * i as f64]).collect();
    assert!(matches!(
        convex_hull(&line),
        Err(GeometryError::Degenerate { kind: Degeneracy::Collinear })
    ));
}

#[test]
fn random_ball_containment() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut pts = Vec::new();
    while pts.len() < 10_000 {
        let p: Point3 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if norm3(&p) <= 1.0 {
            pts.push(p);
        }
    }
    let h = convex_hull(&pts).unwrap();
    let eps = h.tolerance();
    assert!(pts.iter().all(|p| h.contains(p, eps)));
    assert_eq!(h.euler_characteristic(), 2);
    let vol = h.volume();
    assert!(vol < 4.0 / 3.0 * std::f64::consts::PI && vol > 3.9);

    // Superset hull is at least as large.
    let mut more = pts.clone();
    more.push([1.2, 0.0, 0.0]);
    assert!(convex_hull(&more).unwrap().volume() >= vol);
}

#[test]
fn volume_invariant_under_rigid_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Point3> = (0..500)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0), rng.random_range(0.0..1.0)])
        .collect();
    let v0 = convex_hull(&pts).unwrap().volume();
    let (a, b) = (0.7_f64, -1.3_f64);
    let moved: Vec<Point3> = pts
        .iter()
        .map(|p| {
            let x = a.cos() * p[0] - a.sin() * p[1];
            let y = a.sin() * p[0] + a.cos() * p[1];
            let y2 = b.cos() * y - b.sin() * p[2];
            let z2 = b.sin() * y + b.cos() * p[2];
            [x + 10.0, y2 - 3.0, z2 + 0.25]
        })
        .collect();
    let v1 = convex_hull(&moved).unwrap().volume();
    assert!((v0 - v1).abs() <= 1e-10 * v0);
}

fn cube_halfspaces(half: f64, centre: Point3) -> Vec<Halfspace3> {
    let mut hs = Vec::new();
    for d in 0..3 {
        let mut n = [0.0; 3];
        n[d] = 1.0;
        hs.push(Halfspace3::new(n, centre[d] + half).unwrap());
        n[d] = -1.0;
        hs.push(Halfspace3::new(n, -(centre[d] - half)).unwrap());
    }
    hs
}

#[test]
fn cube_chebyshev_centre() {
    let ip = interior_point(&cube_halfspaces(0.5, [0.5; 3])).unwrap();
    for d in 0..3 {
        assert!((ip.point[d] - 0.5).abs() <= 1e-9);
    }
    assert!((ip.slack - 0.5).abs() <= 1e-9);
}

#[test]
fn opposing_halfspaces_infeasible() {
    let hs = vec![
        Halfspace3::new([1.0, 0.0, 0.0], 0.0).unwrap(),
        Halfspace3::new([-1.0, 0.0, 0.0], -1.0).unwrap(),
    ];
    assert!(matches!(interior_point(&hs), Err(GeometryError::Infeasible { .. })));
}

#[test]
fn cube_intersection() {
    let p = halfspace_intersection(&cube_halfspaces(0.5, [0.0; 3])).unwrap();
    assert_eq!(p.hull.vertices().len(), 8);
    for v in p.hull.vertices() {
        assert!(v.iter().all(|x| (x.abs() - 0.5).abs() <= 1e-12));
    }
    assert!((p.volume() - 1.0).abs() <= 1e-12);
    assert_eq!(p.binding, vec![0, 1, 2, 3, 4, 5]);
}

#[test]
fn tetrahedron_intersection() {
    // x, y, z ≥ 0 and x + y + z ≤ 1: volume 1/6.
    let hs = vec![
        Halfspace3::new([-1.0, 0.0, 0.0], 0.0).unwrap(),
        Halfspace3::new([0.0, -1.0, 0.0], 0.0).unwrap(),
        Halfspace3::new([0.0, 0.0, -1.0], 0.0).unwrap(),
        Halfspace3::new([1.0, 1.0, 1.0], 1.0).unwrap(),
    ];
    let p = halfspace_intersection(&hs).unwrap();
    assert_eq!(p.hull.vertices().len(), 4);
    assert!((p.volume() - 1.0 / 6.0).abs() <= 1e-12);
}

#[test]
fn unbounded_detected() {
    let hs = vec![
        Halfspace3::new([-1.0, 0.0, 0.0], 0.0).unwrap(),
        Halfspace3::new([0.0, -1.0, 0.0], 0.0).unwrap(),
        Halfspace3::new([0.0, 0.0, -1.0], 0.0).unwrap(),
        Halfspace3::new([1.0, 1.0, 0.0], 1.0).unwrap(),
    ];
    assert!(matches!(halfspace_intersection(&hs), Err(GeometryError::Unbounded)));
}

#[test]
fn redundant_constraints_are_not_binding() {
    let mut hs = cube_halfspaces(0.5, [0.0; 3]);
    hs.push(Halfspace3::new([1.0, 1.0, 1.0], 10.0).unwrap());
    let p = halfspace_intersection(&hs).unwrap();
    assert!(!p.binding.contains(&6));
    assert!((p.volume() - 1.0).abs() <= 1e-12);
}

#[test]
fn supplied_interior_point_must_be_strict() {
    let hs = cube_halfspaces(0.5, [0.0; 3]);
    assert!(matches!(
        halfspace_intersection_about(&hs, [0.5, 0.0, 0.0]),
        Err(GeometryError::NotInterior { .. })
    ));
}
