//! Seedable uniform sampling of unit vectors.
//!
//! Vector `i` of a set is drawn from its own ChaCha8 stream keyed by the set
//! seed, so any index range can be generated independently and sets with the
//! same seed are nested: the first `m` vectors of a larger set are exactly the
//! set of size `m`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Gaussian draws shorter than this are redrawn before normalisation.
const MIN_NORM: f64 = 1e-8;

/// `count` directions on the unit sphere in `R^dim`, reproducible from
/// `(dim, count, seed)`. Vectors are generated on demand.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    dim: usize,
    count: usize,
    seed: u64,
    base: ChaCha8Rng,
}

impl DirectionSet {
    pub fn new(dim: usize, count: usize, seed: u64) -> Self {
        assert!(dim >= 1, "sphere dimension must be at least 1");
        assert!(count >= 1, "direction count must be at least 1");
        Self {
            dim,
            count,
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The first `count` directions of this set.
    pub fn prefix(&self, count: usize) -> DirectionSet {
        assert!(count >= 1 && count <= self.count);
        DirectionSet {
            count,
            ..self.clone()
        }
    }

    /// Writes direction `i` into `out`.
    pub fn fill(&self, i: usize, out: &mut [f64]) {
        assert!(i < self.count, "direction index out of range");
        assert_eq!(out.len(), self.dim);
        let mut rng = self.base.clone();
        rng.set_stream(i as u64);
        loop {
            for v in out.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= MIN_NORM {
                out.iter_mut().for_each(|v| *v /= norm);
                return;
            }
        }
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.fill(i, &mut v);
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.count).map(move |i| self.vector(i))
    }

    /// Row-major `count × dim` table.
    pub fn to_table(&self) -> Vec<f64> {
        let mut table = vec![0.0; self.count * self.dim];
        table
            .par_chunks_mut(self.dim)
            .enumerate()
            .for_each(|(i, row)| self.fill(i, row));
        table
    }
}

pub fn sample_sphere(dim: usize, m: usize, seed: u64) -> DirectionSet {
    DirectionSet::new(dim, m, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sphere_is_plus_minus_one() {
        let set = sample_sphere(1, 4, 7);
        for v in set.iter() {
            assert!(v[0] == 1.0 || v[0] == -1.0);
        }
    }

    #[test]
    fn deterministic_and_nested() {
        let a = sample_sphere(6, 50, 11).to_table();
        let b = sample_sphere(6, 50, 11).to_table();
        assert_eq!(a, b);
        let small = sample_sphere(6, 20, 11).to_table();
        assert_eq!(&a[..small.len()], &small[..]);
        let other = sample_sphere(6, 50, 12).to_table();
        assert_ne!(a, other);
    }

    #[test]
    fn unit_norm() {
        let set = sample_sphere(6, 1000, 3);
        for v in set.iter() {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let set = sample_sphere(3, 257, 99);
        let seq: Vec<f64> = set.iter().flatten().collect();
        assert_eq!(seq, set.to_table());
    }
}
