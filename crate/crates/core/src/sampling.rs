//! Seeded quasi-random point sets.
//!
//! Points come from a Halton sequence with a Cranley–Patterson rotation
//! drawn from a ChaCha generator, so a fixed seed reproduces the same set
//! bit for bit while different seeds give independent rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Rotated Halton sequence in the unit cube `[0, 1)^dim`.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sequence supports up to 16 dimensions");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        Self {
            dim,
            shift,
            index: 1,
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|d| {
                let v = radical_inverse(i, PRIMES[d]) + self.shift[d];
                v - v.floor()
            })
            .collect()
    }
}

/// `count` quasi-random points in the box `[lo, hi]`.
pub fn box_points<T: Scalar>(lo: &[T], hi: &[T], count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut h = Halton::new(lo.len(), seed);
    (0..count)
        .map(|_| {
            h.next_point()
                .iter()
                .enumerate()
                .map(|(d, &u)| lo[d] + (hi[d] - lo[d]) * T::lit(u))
                .collect()
        })
        .collect()
}

/// `count` quasi-random points in the closed ball `B[0, radius]` of
/// dimension `dim`, by rejection from the enclosing cube.
pub fn ball_points<T: Scalar>(dim: usize, radius: T, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut h = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = h.next_point();
        let p: Vec<f64> = u.iter().map(|&v| 2.0 * v - 1.0).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            out.push(p.iter().map(|&v| T::lit(v) * radius).collect());
        }
    }
    out
}

/// `count` points on the sphere of the given radius (radial projection of
/// quasi-random cube points).
pub fn sphere_points<T: Scalar>(dim: usize, radius: T, count: usize, seed: u64) -> Vec<Vec<T>> {
    if dim == 1 {
        return (0..count)
            .map(|i| vec![if i % 2 == 0 { radius } else { -radius }])
            .collect();
    }
    let mut h = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<f64> = h.next_point().iter().map(|&v| 2.0 * v - 1.0).collect();
        let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 {
            out.push(p.iter().map(|&v| T::lit(v / n) * radius).collect());
        }
    }
    out
}
