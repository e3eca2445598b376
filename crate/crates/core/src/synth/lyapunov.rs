use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::synth::eigen::spectral_abscissa;
use crate::synth::matrix::{is_positive_definite, Lu, Matrix};

/// Largest state dimension accepted by the vectorized solver.
pub const MAX_KRONECKER_DIM: usize = 20;

/// Solves the continuous Lyapunov equation `AᵀP + PA = −Q`.
///
/// `A` must be Hurwitz and `Q` symmetric positive definite. The equation is
/// vectorized into the `n² × n²` system `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) = −vec(Q)`
/// and solved by LU with one refinement step; the result is symmetrized.
pub fn solve_lyapunov<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::invalid("solve_lyapunov: A and Q must be square of equal size"));
    }
    if n > MAX_KRONECKER_DIM {
        return Err(Error::invalid(format!(
            "solve_lyapunov: dimension {n} exceeds {MAX_KRONECKER_DIM}"
        )));
    }
    if q.asymmetry() > T::lit(1e-12) * (T::one() + q.max_abs()) || !is_positive_definite(q) {
        return Err(Error::PreconditionViolation(
            "Q must be symmetric positive definite".into(),
        ));
    }
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= T::zero() {
        return Err(Error::PreconditionViolation(format!(
            "A is not Hurwitz (spectral abscissa {abscissa})"
        )));
    }
    solve_lyapunov_unchecked(a, q)
}

/// Vectorized solve without the Hurwitz/definiteness preconditions.
pub(crate) fn solve_lyapunov_unchecked<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let size = n * n;
    // Column-major vec: index of P[k, l] is k + n·l.
    let mut k = Matrix::<T>::zeros(size, size);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            // (AᵀP)[i, j] = Σ_k A[k, i] P[k, j]
            for kk in 0..n {
                k[(row, kk + n * j)] += a[(kk, i)];
            }
            // (PA)[i, j] = Σ_l P[i, l] A[l, j]
            for l in 0..n {
                k[(row, i + n * l)] += a[(l, j)];
            }
        }
    }
    let rhs = Matrix::from_fn(size, 1, |r, _| -q[(r % n, r / n)]);
    let lu = Lu::factor(&k).map_err(|e| match e {
        Error::NumericalFailure(m) => Error::numerical(format!("Kronecker system singular: {m}")),
        other => other,
    })?;
    let v = lu.solve_refined(&k, &rhs)?;
    let p = Matrix::from_fn(n, n, |i, j| v[(i + n * j, 0)]);
    Ok(p.sym())
}

/// Frobenius norm of `AᵀP + PA + Q`.
pub fn lyapunov_residual<T: Scalar>(a: &Matrix<T>, p: &Matrix<T>, q: &Matrix<T>) -> T {
    let r = &(&(&a.transpose() * p) + &(p * a)) + q;
    r.frobenius_norm()
}
