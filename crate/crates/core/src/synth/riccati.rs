//! Stabilizing gain synthesis through the continuous algebraic Riccati
//! equation with `Q = I`, `R = I`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::synth::eigen::{min_max_symmetric_eigenvalue, real_schur, spectral_abscissa};
use crate::synth::lyapunov::{solve_lyapunov, solve_lyapunov_unchecked};
use crate::synth::matrix::Matrix;

/// Hamiltonian eigenvalues closer than this to the imaginary axis mark the
/// pair as not stabilizable.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-8;

/// Outcome of [`synthesize_gain`].
#[derive(Debug, Clone)]
pub struct GainSynthesisResult<T> {
    /// State feedback `F` (m×n) with `A + BF` Hurwitz.
    pub gain: Matrix<T>,
    /// Solution of `(A+BF)ᵀP + P(A+BF) = −I`.
    pub lyapunov: Matrix<T>,
    /// Verified decay: `xᵀP(A+BF)x ≤ −decay·|x|²`.
    pub decay: T,
    /// Spectral abscissa of `A + BF`.
    pub abscissa: T,
    /// Stabilizing Riccati solution the gain was derived from.
    pub riccati: Matrix<T>,
}

impl<T: Scalar> GainSynthesisResult<T> {
    pub fn closed_loop(&self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        a + &(b * &self.gain)
    }
}

fn not_stabilizable(reason: impl Into<String>) -> Error {
    Error::NotStabilizable {
        reason: reason.into(),
        witness: None,
    }
}

/// Riccati residual `AᵀX + XA − XBBᵀX + I`.
pub fn riccati_residual<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, x: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let bbt = b * &b.transpose();
    let lin = &(&a.transpose() * x) + &(x * a);
    let quad = &(x * &bbt) * x;
    &(&lin - &quad) + &Matrix::identity(n)
}

/// Stabilizing solution of `AᵀX + XA − XBBᵀX + I = 0` from the stable
/// invariant subspace of the Hamiltonian `[[A, −BBᵀ], [−I, −Aᵀ]]`.
pub fn solve_care<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::invalid("solve_care: A must be n×n and B must be n×m"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("solve_care: non-finite entries"));
    }
    let bbt = b * &b.transpose();
    let mut h = Matrix::<T>::zeros(2 * n, 2 * n);
    h.set_block(0, 0, a);
    h.set_block(0, n, &bbt.scale(-T::one()));
    h.set_block(n, 0, &Matrix::identity(n).scale(-T::one()));
    h.set_block(n, n, &a.transpose().scale(-T::one()));

    let mut schur = real_schur(&h)?;
    let tol = T::lit(IMAGINARY_AXIS_TOL);
    if let Some(e) = schur.eigenvalues().iter().find(|e| e.re.abs() <= tol) {
        return Err(not_stabilizable(format!(
            "Hamiltonian eigenvalue {} + {}i lies on the imaginary axis",
            e.re, e.im
        )));
    }
    let dim = schur.reorder(|re| re < T::zero())?;
    if dim != n {
        return Err(not_stabilizable(format!(
            "stable Hamiltonian subspace has dimension {dim}, expected {n}"
        )));
    }
    let u11 = schur.z.block(0, 0, n, n);
    let u21 = schur.z.block(n, 0, n, n);
    // X U11 = U21  <=>  U11ᵀ Xᵀ = U21ᵀ
    let xt = u11
        .transpose()
        .solve(&u21.transpose())
        .map_err(|_| not_stabilizable("stable subspace is not a graph over the state space"))?;
    let mut x = xt.transpose().sym();

    // Newton–Kleinman polishing; kept only while the residual shrinks.
    let mut res = riccati_residual(a, b, &x).frobenius_norm();
    for _ in 0..3 {
        if res <= T::epsilon() * T::lit(16.0) {
            break;
        }
        let f = (&b.transpose() * &x).scale(-T::one());
        let acl = a + &(b * &f);
        if spectral_abscissa(&acl)? >= T::zero() {
            break;
        }
        let rhs = &Matrix::identity(n) + &(&f.transpose() * &f);
        let Ok(next) = solve_lyapunov_unchecked(&acl, &rhs) else {
            break;
        };
        let next_res = riccati_residual(a, b, &next).frobenius_norm();
        if next_res < res {
            x = next;
            res = next_res;
        } else {
            break;
        }
    }
    Ok(x)
}

/// Synthesizes an LQR gain `F = −BᵀX` and the decay certificate for
/// `A + BF`.
pub fn synthesize_gain<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<GainSynthesisResult<T>> {
    let n = a.rows();
    let x = solve_care(a, b)?;
    let gain = (&b.transpose() * &x).scale(-T::one());
    let acl = a + &(b * &gain);
    let abscissa = spectral_abscissa(&acl)?;
    if abscissa >= T::zero() {
        return Err(not_stabilizable(format!(
            "closed loop spectral abscissa {abscissa} is not negative"
        )));
    }
    let lyapunov = solve_lyapunov(&acl, &Matrix::identity(n))?;
    let (_, top) = min_max_symmetric_eigenvalue(&(&lyapunov * &acl).sym())?;
    let decay = -top;
    if decay <= T::zero() {
        return Err(Error::numerical("decay certificate is not positive"));
    }
    Ok(GainSynthesisResult {
        gain,
        lyapunov,
        decay,
        abscissa,
        riccati: x,
    })
}
