use proptest::prelude::*;
use sdstab::synth::{solve_lyapunov, spectral_abscissa, symmetric_eigenvalues, synthesize_gain, uniform_bounds};
use sdstab::Matrix;

fn mat(n: usize, m: usize, entries: &[f64]) -> Matrix {
    Matrix::from_fn(n, m, |i, j| entries[i * m + j])
}

/// Shifts `m` left past its Gershgorin discs.
fn hurwitz(n: usize, entries: &[f64], extra: f64) -> Matrix {
    let m = mat(n, n, entries);
    let r = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Matrix::from_fn(n, n, |i, j| m[(i, j)] - if i == j { r + extra } else { 0.0 })
}

fn spd(n: usize, entries: &[f64]) -> Matrix {
    let c = mat(n, n, entries);
    Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| c[(k, i)] * c[(k, j)]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }
    })
}

/// ‖AᵀP + PA + Q‖_F by explicit sums.
fn residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut r = q[(i, j)];
            for k in 0..n {
                r += a[(k, i)] * p[(k, j)] + p[(i, k)] * a[(k, j)];
            }
            s += r * r;
        }
    }
    s.sqrt()
}

fn frob(q: &Matrix) -> f64 {
    q.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lyapunov_residual_small(
        n in 1usize..=6,
        a in prop::collection::vec(-2.0f64..2.0, 36),
        c in prop::collection::vec(-1.0f64..1.0, 36),
        extra in 0.05f64..1.0,
    ) {
        let a = hurwitz(n, &a, extra);
        let q = spd(n, &c);
        let p = solve_lyapunov(&a, &q).unwrap();
        prop_assert!(residual(&a, &p, &q) <= 1e-10 * (1.0 + frob(&q)));
        prop_assert!(p.asymmetry() <= 1e-12 * (1.0 + frob(&p)));
        prop_assert!(symmetric_eigenvalues(&p).unwrap()[0] > 0.0);
    }

    #[test]
    fn gain_synthesis_stabilizes(
        n in 1usize..=5,
        m in 1usize..=2,
        a in prop::collection::vec(-2.0f64..2.0, 25),
        b in prop::collection::vec(-2.0f64..2.0, 10),
    ) {
        let a = mat(n, n, &a);
        let b = mat(n, m, &b);
        let r = synthesize_gain(&a, &b).unwrap();
        let acl = r.closed_loop(&a, &b);
        prop_assert!(spectral_abscissa(&acl).unwrap() < -1e-8);
        let sym = (&r.lyapunov * &acl).sym();
        let top = *symmetric_eigenvalues(&sym).unwrap().last().unwrap();
        prop_assert!(top <= -r.decay + 1e-10);
        prop_assert!(r.decay > 0.0);
    }

    #[test]
    fn scalar_riccati_closed_form(a in -3.0f64..3.0, b in 0.5f64..3.0, neg in any::<bool>()) {
        let b = if neg { -b } else { b };
        let r = synthesize_gain(&Matrix::scalar(a), &Matrix::scalar(b)).unwrap();
        // 2ax − b²x² + 1 = 0, stabilizing root
        let x = (a + (a * a + b * b).sqrt()) / (b * b);
        prop_assert!((r.riccati[(0, 0)] - x).abs() <= 1e-10);
        prop_assert!((r.gain[(0, 0)] + b * x).abs() <= 1e-10);
        prop_assert!((r.abscissa + (a * a + b * b).sqrt()).abs() <= 1e-10);
    }
}

#[test]
fn uniform_bounds_constant_field() {
    let b = uniform_bounds(|_: &[f64]| Ok(Matrix::identity(2)), 2, 3.0, 100, 1).unwrap();
    assert_eq!((b.c_low, b.c_high), (1.0, 1.0));
}

#[test]
fn uniform_bounds_radial_field() {
    let field = |x: &[f64]| Ok(Matrix::identity(2).scale(1.0 + x[0] * x[0] + x[1] * x[1]));
    let b = uniform_bounds(field, 2, 1.0, 400, 3).unwrap();
    assert_eq!(b.c_low, 1.0);
    assert!((b.c_high - 2.0).abs() <= 0.05, "{}", b.c_high);
}

#[test]
fn uniform_bounds_scalar_riccati() {
    let field = |x: &[f64]| synthesize_gain(&Matrix::scalar(x[0]), &Matrix::scalar(1.0)).map(|r| r.lyapunov);
    let b = uniform_bounds(field, 1, 1.0, 50, 1).unwrap();
    assert!(b.c_low > 0.0 && b.c_high.is_finite() && b.c_low <= b.c_high);
}
