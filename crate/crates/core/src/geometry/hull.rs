//! Quickhull in three dimensions.

use std::collections::HashMap;

use super::{cross, dot3, norm3, sub3, GeometryError, Point3};

/// Relative hull tolerance: points within `EPS_REL × bounding-box diagonal` of
/// a face plane are considered on it.
pub const EPS_REL: f64 = 1e-9;

/// A triangulated convex polytope with outward-oriented faces.
#[derive(Debug, Clone)]
pub struct Hull3 {
    vertices: Vec<Point3>,
    /// Index of each vertex in the input point list.
    source: Vec<usize>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Point3>,
    offsets: Vec<f64>,
    eps: f64,
}

impl Hull3 {
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Outward unit normal of each face.
    pub fn face_normals(&self) -> &[Point3] {
        &self.normals
    }

    /// Plane offsets: face `f` is `normals[f] · x = offsets[f]`.
    pub fn face_offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Tolerance the hull was built with.
    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    /// Largest signed distance of `p` above any face plane.
    pub fn max_excess(&self, p: &Point3) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, o)| dot3(n, p) - o)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        self.max_excess(p) <= tol
    }

    pub fn edge_count(&self) -> usize {
        self.faces.len() * 3 / 2
    }

    /// `V − E + F`, which is 2 for a closed convex triangulation.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    pub fn centroid(&self) -> Point3 {
        let n = self.vertices.len() as f64;
        let s = self
            .vertices
            .iter()
            .fold([0.0; 3], |a, v| [a[0] + v[0], a[1] + v[1], a[2] + v[2]]);
        [s[0] / n, s[1] / n, s[2] / n]
    }

    /// Sum of signed tetrahedra from the vertex centroid.
    pub fn volume(&self) -> f64 {
        let c = self.centroid();
        let six: f64 = self
            .faces
            .iter()
            .map(|f| {
                let a = sub3(&self.vertices[f[0]], &c);
                let b = sub3(&self.vertices[f[1]], &c);
                let d = sub3(&self.vertices[f[2]], &c);
                dot3(&a, &cross(&b, &d))
            })
            .sum();
        (six / 6.0).max(0.0)
    }

    /// Rebuilds a hull from explicit mesh data; used when reading meshes back.
    pub fn from_mesh(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let mut normals = Vec::with_capacity(faces.len());
        let mut offsets = Vec::with_capacity(faces.len());
        for f in &faces {
            if f.iter().any(|&i| i >= vertices.len()) {
                return Err(GeometryError::Internal("face index out of range".into()));
            }
            let (n, o) = plane(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]])
                .ok_or_else(|| GeometryError::Internal("zero-area face".into()))?;
            normals.push(n);
            offsets.push(o);
        }
        let source = (0..vertices.len()).collect();
        let eps = EPS_REL * bbox_diagonal(&vertices);
        Ok(Self {
            vertices,
            source,
            faces,
            normals,
            offsets,
            eps,
        })
    }
}

pub(crate) fn bbox_diagonal(points: &[Point3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    norm3(&sub3(&hi, &lo))
}

fn plane(a: &Point3, b: &Point3, c: &Point3) -> Option<(Point3, f64)> {
    let n = cross(&sub3(b, a), &sub3(c, a));
    let len = norm3(&n);
    if !(len > 0.0) || !len.is_finite() {
        return None;
    }
    let n = [n[0] / len, n[1] / len, n[2] / len];
    let o = (dot3(&n, a) + dot3(&n, b) + dot3(&n, c)) / 3.0;
    Some((n, o))
}

struct Face {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
    /// Neighbour across edge `v[e] → v[(e + 1) % 3]`.
    adj: [usize; 3],
    outside: Vec<usize>,
    furthest: usize,
    furthest_dist: f64,
    alive: bool,
}

impl Face {
    fn dist(&self, p: &Point3) -> f64 {
        dot3(&self.normal, p) - self.offset
    }

    fn push_outside(&mut self, i: usize, d: f64) {
        if d > self.furthest_dist {
            self.furthest_dist = d;
            self.furthest = i;
        }
        self.outside.push(i);
    }
}

/// Convex hull of at least four affinely independent points.
pub fn convex_hull(points: &[Point3]) -> Result<Hull3, GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let diag = bbox_diagonal(points);
    let eps = EPS_REL * diag;
    if !(diag > 0.0) {
        return Err(GeometryError::Degenerate {
            kind: super::Degeneracy::Coincident,
        });
    }

    let simplex = initial_simplex(points, eps)?;
    let mut faces: Vec<Face> = Vec::new();
    {
        let [i0, i1, i2, i3] = simplex;
        let centre = {
            let s = [points[i0], points[i1], points[i2], points[i3]];
            let mut c = [0.0; 3];
            for p in &s {
                for d in 0..3 {
                    c[d] += p[d] / 4.0;
                }
            }
            c
        };
        let tris = [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i0, i2, i3]];
        for mut t in tris {
            let (mut n, mut o) = plane(&points[t[0]], &points[t[1]], &points[t[2]])
                .ok_or_else(|| GeometryError::Internal("degenerate initial simplex".into()))?;
            if dot3(&n, &centre) - o > 0.0 {
                t.swap(1, 2);
                let p = plane(&points[t[0]], &points[t[1]], &points[t[2]]).unwrap();
                n = p.0;
                o = p.1;
            }
            faces.push(Face {
                v: t,
                normal: n,
                offset: o,
                adj: [usize::MAX; 3],
                outside: Vec::new(),
                furthest: usize::MAX,
                furthest_dist: 0.0,
                alive: true,
            });
        }
        link_all(&mut faces)?;
    }

    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        assign(&mut faces, &[0, 1, 2, 3], i, p, eps);
    }

    let mut stack: Vec<usize> = (0..4).collect();
    let mut visible: Vec<usize> = Vec::new();
    let mut is_visible: Vec<bool> = vec![false; faces.len()];
    let mut horizon: Vec<(usize, usize, usize, usize)> = Vec::new();

    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let apex = faces[fi].furthest;
        let ap = points[apex];

        // Visible region by flood fill from `fi`.
        visible.clear();
        horizon.clear();
        is_visible.resize(faces.len(), false);
        visible.push(fi);
        is_visible[fi] = true;
        let mut head = 0;
        while head < visible.len() {
            let f = visible[head];
            head += 1;
            for e in 0..3 {
                let g = faces[f].adj[e];
                if is_visible[g] {
                    continue;
                }
                if faces[g].dist(&ap) > eps {
                    is_visible[g] = true;
                    visible.push(g);
                }
            }
        }
        for &f in &visible {
            for e in 0..3 {
                let g = faces[f].adj[e];
                if !is_visible[g] {
                    horizon.push((faces[f].v[e], faces[f].v[(e + 1) % 3], g, f));
                }
            }
        }

        // Cone of new faces from the horizon to the apex.
        let first_new = faces.len();
        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(horizon.len());
        for &(a, b, g, _) in &horizon {
            let (normal, offset) = plane(&points[a], &points[b], &ap).ok_or_else(|| {
                GeometryError::Internal("zero-area face while extending hull".into())
            })?;
            let id = faces.len();
            faces.push(Face {
                v: [a, b, apex],
                normal,
                offset,
                adj: [g, usize::MAX, usize::MAX],
                outside: Vec::new(),
                furthest: usize::MAX,
                furthest_dist: 0.0,
                alive: true,
            });
            let back = (0..3)
                .find(|&e| faces[g].v[e] == b && faces[g].v[(e + 1) % 3] == a)
                .ok_or_else(|| GeometryError::Internal("broken hull adjacency".into()))?;
            faces[g].adj[back] = id;
            if by_start.insert(a, id).is_some() {
                return Err(GeometryError::Internal("non-manifold horizon".into()));
            }
        }
        for id in first_new..faces.len() {
            let [_, b, _] = faces[id].v;
            // Edge b → apex meets the new face whose horizon edge starts at b.
            let next = *by_start
                .get(&b)
                .ok_or_else(|| GeometryError::Internal("open horizon".into()))?;
            faces[id].adj[1] = next;
            faces[next].adj[2] = id;
        }

        let new_ids: Vec<usize> = (first_new..faces.len()).collect();
        for &f in &visible {
            faces[f].alive = false;
            let outside = std::mem::take(&mut faces[f].outside);
            for i in outside {
                if i != apex {
                    assign(&mut faces, &new_ids, i, &points[i], eps);
                }
            }
        }
        for &f in &visible {
            is_visible[f] = false;
        }
        stack.extend(new_ids.iter().copied().filter(|&id| !faces[id].outside.is_empty()));
    }

    finish(points, faces, eps)
}

fn assign(faces: &mut [Face], candidates: &[usize], i: usize, p: &Point3, eps: f64) {
    for &f in candidates {
        let d = faces[f].dist(p);
        if d > eps {
            faces[f].push_outside(i, d);
            return;
        }
    }
}

fn link_all(faces: &mut [Face]) -> Result<(), GeometryError> {
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for e in 0..3 {
            edges.insert((f.v[e], f.v[(e + 1) % 3]), (fi, e));
        }
    }
    for fi in 0..faces.len() {
        for e in 0..3 {
            let (a, b) = (faces[fi].v[e], faces[fi].v[(e + 1) % 3]);
            let &(g, _) = edges
                .get(&(b, a))
                .ok_or_else(|| GeometryError::Internal("unpaired edge".into()))?;
            faces[fi].adj[e] = g;
        }
    }
    Ok(())
}

fn initial_simplex(points: &[Point3], eps: f64) -> Result<[usize; 4], GeometryError> {
    use super::Degeneracy;
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for d in 0..3 {
            if p[d] < points[extremes[2 * d]][d] {
                extremes[2 * d] = i;
            }
            if p[d] > points[extremes[2 * d + 1]][d] {
                extremes[2 * d + 1] = i;
            }
        }
    }
    let mut best = (0.0, 0, 0);
    for &a in &extremes {
        for &b in &extremes {
            let d = norm3(&sub3(&points[a], &points[b]));
            if d > best.0 {
                best = (d, a, b);
            }
        }
    }
    let (span, i0, i1) = best;
    if span <= eps {
        return Err(GeometryError::Degenerate {
            kind: Degeneracy::Coincident,
        });
    }
    let dir = sub3(&points[i1], &points[i0]);
    let mut far = (0.0, usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let d = norm3(&cross(&dir, &sub3(p, &points[i0]))) / span;
        if d > far.0 {
            far = (d, i);
        }
    }
    if far.0 <= eps {
        return Err(GeometryError::Degenerate {
            kind: Degeneracy::Collinear,
        });
    }
    let i2 = far.1;
    let (n, o) = plane(&points[i0], &points[i1], &points[i2])
        .ok_or_else(|| GeometryError::Internal("degenerate base triangle".into()))?;
    let mut far = (0.0, usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let d = (dot3(&n, p) - o).abs();
        if d > far.0 {
            far = (d, i);
        }
    }
    if far.0 <= eps {
        return Err(GeometryError::Degenerate {
            kind: Degeneracy::Coplanar,
        });
    }
    Ok([i0, i1, i2, far.1])
}

fn finish(points: &[Point3], faces: Vec<Face>, eps: f64) -> Result<Hull3, GeometryError> {
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut source = Vec::new();
    let mut out_faces = Vec::new();
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let mut tri = [0usize; 3];
        for (k, &v) in f.v.iter().enumerate() {
            tri[k] = *remap.entry(v).or_insert_with(|| {
                vertices.push(points[v]);
                source.push(v);
                vertices.len() - 1
            });
        }
        if !f.normal.iter().all(|x| x.is_finite()) {
            return Err(GeometryError::Internal("non-finite face normal".into()));
        }
        out_faces.push(tri);
        normals.push(f.normal);
        offsets.push(f.offset);
    }
    Ok(Hull3 {
        vertices,
        source,
        faces: out_faces,
        normals,
        offsets,
        eps,
    })
}
