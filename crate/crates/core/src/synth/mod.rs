//! Dense linear algebra for frozen-gain synthesis: eigenvalues and Hurwitz
//! tests, Lyapunov solves, Riccati-based stabilizing gains and uniform
//! bounds on the resulting Lyapunov matrices.

pub mod bounds;
pub mod eigen;
pub mod lyapunov;
pub mod matrix;
pub mod riccati;

pub use bounds::{ball_sample_set, uniform_bounds, UniformBounds};
pub use eigen::{eigenvalues, is_hurwitz, real_schur, spectral_abscissa, symmetric_eigenvalues, Eigenvalue, RealSchur};
pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use matrix::Matrix;
pub use riccati::{riccati_residual, solve_care, synthesize_gain, GainSynthesisResult};
