use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{ball_points, sphere_points};
use crate::scalar::{to_f64_vec, Scalar};
use crate::synth::eigen::min_max_symmetric_eigenvalue;
use crate::synth::matrix::Matrix;

/// Uniform spectral bounds `c_low·I ≤ P(ξ) ≤ c_high·I` over `B[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBounds<T> {
    pub c_low: T,
    pub c_high: T,
    pub radius: T,
}

/// Sample points used by [`uniform_bounds`]: the centre, `samples`
/// quasi-random interior points and `samples/4` (at least two) points on the
/// bounding sphere.
pub fn ball_sample_set<T: Scalar>(dim: usize, radius: T, samples: usize, seed: u64) -> Vec<Vec<T>> {
    let mut pts = vec![vec![T::zero(); dim]];
    pts.extend(ball_points(dim, radius, samples, seed));
    pts.extend(sphere_points(dim, radius, (samples / 4).max(2), seed ^ 0x5eed));
    pts
}

/// Estimates the extreme eigenvalues of the symmetric field `ξ ↦ P(ξ)` over
/// the closed ball of the given radius.
///
/// Evaluation is parallel over sample points; the first failure in sample
/// order is returned, with not-stabilizable errors tagged by the offending
/// `ξ`.
pub fn uniform_bounds<T, F>(field: F, dim: usize, radius: T, samples: usize, seed: u64) -> Result<UniformBounds<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Matrix<T>> + Sync,
{
    if radius <= T::zero() {
        return Err(Error::invalid("radius must be positive"));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let pts = ball_sample_set(dim, radius, samples, seed);
    let extremes: Vec<Result<(T, T)>> = pts
        .par_iter()
        .map(|xi| {
            let p = field(xi).map_err(|e| e.with_witness(to_f64_vec(xi)))?;
            min_max_symmetric_eigenvalue(&p)
        })
        .collect();
    let mut c_low = T::infinity();
    let mut c_high = T::neg_infinity();
    for r in extremes {
        let (lo, hi) = r?;
        c_low = c_low.min(lo);
        c_high = c_high.max(hi);
    }
    Ok(UniformBounds { c_low, c_high, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::riccati::synthesize_gain;

    #[test]
    fn constant_field() {
        let b = uniform_bounds(|_: &[f64]| Ok(Matrix::identity(2)), 2, 3.0, 50, 1).unwrap();
        assert_eq!((b.c_low, b.c_high), (1.0, 1.0));
    }

    #[test]
    fn radial_field_extremes() {
        let f = |xi: &[f64]| {
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            Ok(Matrix::identity(2).scale(1.0 + r2))
        };
        let b = uniform_bounds(f, 2, 1.0, 200, 3).unwrap();
        assert!((b.c_low - 1.0).abs() < 1e-12);
        assert!((b.c_high - 2.0).abs() < 0.05);
    }

    #[test]
    fn scalar_riccati_field() {
        let f = |xi: &[f64]| Ok(synthesize_gain(&Matrix::scalar(xi[0]), &Matrix::scalar(1.0))?.lyapunov);
        let b = uniform_bounds(f, 1, 1.0, 64, 0).unwrap();
        assert!(b.c_low > 0.0 && b.c_high.is_finite() && b.c_low <= b.c_high);
    }

    #[test]
    fn failure_carries_witness() {
        let f = |xi: &[f64]| synthesize_gain(&Matrix::scalar(1.0), &Matrix::scalar(xi[0] * 0.0)).map(|r| r.lyapunov);
        match uniform_bounds(f, 1, 1.0, 8, 0) {
            Err(Error::NotStabilizable { witness: Some(w), .. }) => assert_eq!(w, vec![0.0]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
