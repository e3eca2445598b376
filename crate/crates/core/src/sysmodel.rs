//! Systems, control signals, sampling partitions and trajectories.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::liecalc::VectorFieldExpr;
use crate::scalar::{all_finite, norm, Scalar};
use crate::synth::Matrix;

/// Tolerance for the equilibrium condition `f(0, 0) = 0`.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

/// Number of grid points used when checking a signal's bound.
pub const SIGNAL_CHECK_POINTS: usize = 1000;

/// A finite point of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T>(Vec<T>);

impl<T: Scalar> StateVector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        if !all_finite(&coords) {
            return Err(Error::invalid("state has non-finite entries"));
        }
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n.max(1)])
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> T {
        norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| v.is_zero())
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for StateVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

type TimeFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// How a [`ControlSignal`] produces its values.
#[derive(Clone)]
pub enum SignalSource<T> {
    Zero,
    Constant(Vec<T>),
    /// Values and time derivatives on a grid; exact at the nodes, cubic
    /// Hermite in between.
    Sampled {
        times: Vec<T>,
        values: Vec<Vec<T>>,
        slopes: Vec<Vec<T>>,
    },
    Function(TimeFn<T>),
}

impl<T> fmt::Debug for SignalSource<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSource::Zero => write!(f, "Zero"),
            SignalSource::Constant(_) => write!(f, "Constant"),
            SignalSource::Sampled { times, .. } => write!(f, "Sampled({} nodes)", times.len()),
            SignalSource::Function(_) => write!(f, "Function"),
        }
    }
}

/// Open-loop input `u: [0, ε] → B[0, M; ℝᵐ]`. Time is local to the
/// sampling interval.
#[derive(Debug, Clone)]
pub struct ControlSignal<T> {
    horizon: T,
    bound: T,
    dim: usize,
    source: SignalSource<T>,
}

impl<T: Scalar> ControlSignal<T> {
    /// Builds a signal and checks `|u(t)| ≤ M` on a uniform grid.
    pub fn new(horizon: T, bound: T, dim: usize, source: SignalSource<T>) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::invalid("signal horizon must be positive"));
        }
        if !(bound > T::zero()) || !bound.is_finite() {
            return Err(Error::invalid("signal bound must be positive and finite"));
        }
        if let SignalSource::Sampled { times, values, slopes } = &source {
            if times.is_empty() || times.len() != values.len() || times.len() != slopes.len() {
                return Err(Error::invalid("sampled signal needs matching nodes, values and slopes"));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("sampled signal nodes must increase"));
            }
        }
        let sig = Self { horizon, bound, dim, source };
        let slack = bound * (T::one() + T::lit(1e-9));
        let last = SIGNAL_CHECK_POINTS - 1;
        for k in 0..SIGNAL_CHECK_POINTS {
            let t = horizon * T::lit(k as f64) / T::lit(last as f64);
            let u = sig.value(t);
            if u.len() != dim || !all_finite(&u) {
                return Err(Error::invalid(format!("signal value at t = {t} is malformed")));
            }
            let m = norm(&u);
            if m > slack {
                return Err(Error::PreconditionViolation(format!(
                    "signal norm {m} at t = {t} exceeds bound {bound}"
                )));
            }
        }
        Ok(sig)
    }

    pub fn zero(horizon: T, dim: usize) -> Result<Self> {
        Self::new(horizon, T::one(), dim, SignalSource::Zero)
    }

    pub fn constant(horizon: T, value: Vec<T>) -> Result<Self> {
        let bound = norm(&value).max(T::min_positive_value());
        let dim = value.len();
        Self::new(horizon, bound, dim, SignalSource::Constant(value))
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &SignalSource<T> {
        &self.source
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.source, SignalSource::Zero)
    }

    /// Value at local time `t`, clamped to `[0, ε]`.
    pub fn value(&self, t: T) -> Vec<T> {
        let t = t.max(T::zero()).min(self.horizon);
        match &self.source {
            SignalSource::Zero => vec![T::zero(); self.dim],
            SignalSource::Constant(v) => v.clone(),
            SignalSource::Function(f) => f(t),
            SignalSource::Sampled { times, values, slopes } => hermite(times, values, slopes, t),
        }
    }
}

fn hermite<T: Scalar>(times: &[T], values: &[Vec<T>], slopes: &[Vec<T>], t: T) -> Vec<T> {
    let n = times.len();
    if n == 1 || t <= times[0] {
        return values[0].clone();
    }
    if t >= times[n - 1] {
        return values[n - 1].clone();
    }
    let k = times.partition_point(|&s| s <= t) - 1;
    if times[k] == t {
        return values[k].clone();
    }
    let h = times[k + 1] - times[k];
    let s = (t - times[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::two();
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    (0..values[k].len())
        .map(|i| {
            h00 * values[k][i] + h10 * h * slopes[k][i] + h01 * values[k + 1][i] + h11 * h * slopes[k + 1][i]
        })
        .collect()
}

type RhsFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;

/// `ẋ = f(x, u)` with `f(0, 0) = 0`.
#[derive(Clone)]
pub struct GeneralSystem<T> {
    dim_state: usize,
    dim_input: usize,
    rhs: RhsFn<T>,
    lipschitz_hint: Option<T>,
}

impl<T: Scalar> fmt::Debug for GeneralSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralSystem")
            .field("dim_state", &self.dim_state)
            .field("dim_input", &self.dim_input)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .finish()
    }
}

impl<T: Scalar> GeneralSystem<T> {
    pub fn new(
        dim_state: usize,
        dim_input: usize,
        rhs: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim_state == 0 {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        let sys = Self {
            dim_state,
            dim_input,
            rhs: Arc::new(rhs),
            lipschitz_hint: None,
        };
        let f0 = sys.rhs(&vec![T::zero(); dim_state], &vec![T::zero(); dim_input]);
        if f0.len() != dim_state {
            return Err(Error::invalid("right-hand side has the wrong dimension"));
        }
        let r = norm(&f0);
        if !(r <= T::lit(EQUILIBRIUM_TOL)) {
            return Err(Error::PreconditionViolation(format!(
                "f(0, 0) has norm {r}; the origin must be an equilibrium"
            )));
        }
        Ok(sys)
    }

    pub fn with_lipschitz_hint(mut self, l: T) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    pub fn dim_input(&self) -> usize {
        self.dim_input
    }

    pub fn lipschitz_hint(&self) -> Option<T> {
        self.lipschitz_hint
    }

    pub fn rhs(&self, x: &[T], u: &[T]) -> Vec<T> {
        (self.rhs)(x, u)
    }
}

/// `ẋ = f(x) + u·g(x)` with scalar input.
#[derive(Debug, Clone)]
pub struct AffineSystem {
    drift: VectorFieldExpr,
    input_field: VectorFieldExpr,
}

impl AffineSystem {
    pub fn new(drift: VectorFieldExpr, input_field: VectorFieldExpr) -> Result<Self> {
        if drift.dim() != input_field.dim() {
            return Err(Error::invalid("drift and input field dimensions differ"));
        }
        let f0: Vec<f64> = drift.eval(&vec![0.0; drift.dim()])?;
        let r = norm(&f0);
        if !(r <= EQUILIBRIUM_TOL) {
            return Err(Error::PreconditionViolation(format!("f(0) has norm {r}")));
        }
        Ok(Self { drift, input_field })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn drift(&self) -> &VectorFieldExpr {
        &self.drift
    }

    pub fn input_field(&self) -> &VectorFieldExpr {
        &self.input_field
    }
}

type MatFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;

/// `ẋ = A(x)x + B(x)u`.
#[derive(Clone)]
pub struct StateLinearSystem<T> {
    n: usize,
    m: usize,
    a: MatFn<T>,
    b: MatFn<T>,
}

impl<T: Scalar> fmt::Debug for StateLinearSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateLinearSystem {{ n: {}, m: {} }}", self.n, self.m)
    }
}

impl<T: Scalar> StateLinearSystem<T> {
    /// Checks shapes and finiteness at the origin.
    pub fn new(
        n: usize,
        m: usize,
        a: impl Fn(&[T]) -> Matrix<T> + Send + Sync + 'static,
        b: impl Fn(&[T]) -> Matrix<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid("state and input dimensions must be positive"));
        }
        let sys = Self {
            n,
            m,
            a: Arc::new(a),
            b: Arc::new(b),
        };
        let z = vec![T::zero(); n];
        let (a0, b0) = (sys.a(&z), sys.b(&z));
        if a0.shape() != (n, n) || b0.shape() != (n, m) {
            return Err(Error::invalid(format!(
                "A(0) is {:?} and B(0) is {:?}, expected ({n}, {n}) and ({n}, {m})",
                a0.shape(),
                b0.shape()
            )));
        }
        if !a0.is_finite() || !b0.is_finite() {
            return Err(Error::invalid("A(0) or B(0) has non-finite entries"));
        }
        Ok(sys)
    }

    /// Constant `(A, B)`.
    pub fn lti(a: Matrix<T>, b: Matrix<T>) -> Result<Self> {
        let (n, m) = (a.rows(), b.cols());
        Self::new(n, m, move |_| a.clone(), move |_| b.clone())
    }

    pub fn dim_state(&self) -> usize {
        self.n
    }

    pub fn dim_input(&self) -> usize {
        self.m
    }

    pub fn a(&self, x: &[T]) -> Matrix<T> {
        (self.a)(x)
    }

    pub fn b(&self, x: &[T]) -> Matrix<T> {
        (self.b)(x)
    }
}

/// `rhs(x, u) = A(x)x + B(x)u`.
pub fn state_linear_as_general<T: Scalar>(sys: &StateLinearSystem<T>) -> GeneralSystem<T> {
    let s = sys.clone();
    GeneralSystem::new(sys.n, sys.m, move |x, u| {
        let ax = s.a(x).mat_vec(x);
        let bu = s.b(x).mat_vec(u);
        ax.iter().zip(&bu).map(|(&p, &q)| p + q).collect()
    })
    .expect("A(x)x + B(x)u vanishes at the origin")
}

/// `rhs(x, u) = f(x) + u·g(x)`.
pub fn affine_as_general<T: Scalar>(sys: &AffineSystem) -> Result<GeneralSystem<T>> {
    let f = sys.drift.clone();
    let g = sys.input_field.clone();
    GeneralSystem::new(sys.dim(), 1, move |x: &[T], u: &[T]| {
        let fx: Vec<T> = f.eval(x).unwrap_or_else(|_| vec![T::nan(); x.len()]);
        let gx: Vec<T> = g.eval(x).unwrap_or_else(|_| vec![T::nan(); x.len()]);
        fx.iter().zip(&gx).map(|(&a, &b)| a + u[0] * b).collect()
    })
}

/// `T_1 = 0 < T_2 < …`: an explicit prefix plus an optional uniform tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPartition<T> {
    prefix: Vec<T>,
    tail_step: Option<T>,
}

/// One sampling interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub index: usize,
    pub start: T,
    pub end: T,
    pub from_tail: bool,
}

impl<T: Scalar> SamplingPartition<T> {
    pub fn new(prefix: Vec<T>, tail_step: Option<T>) -> Result<Self> {
        if prefix.first() != Some(&T::zero()) {
            return Err(Error::invalid("a partition starts at T_1 = 0"));
        }
        if !all_finite(&prefix) || prefix.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("partition times must be finite and strictly increasing"));
        }
        if let Some(h) = tail_step {
            if !(h > T::zero()) || !h.is_finite() {
                return Err(Error::invalid("uniform extension step must be positive"));
            }
        }
        Ok(Self { prefix, tail_step })
    }

    pub fn prefix(&self) -> &[T] {
        &self.prefix
    }

    pub fn tail_step(&self) -> Option<T> {
        self.tail_step
    }

    /// `T_{k+1}` for zero-based `k`, extending with the uniform tail.
    pub fn time(&self, k: usize) -> Option<T> {
        if k < self.prefix.len() {
            return Some(self.prefix[k]);
        }
        let h = self.tail_step?;
        let last = *self.prefix.last().expect("non-empty prefix");
        Some(last + h * T::lit((k + 1 - self.prefix.len()) as f64))
    }

    /// Intervals covering `[0, horizon]`; the last one is clipped to the
    /// horizon.
    pub fn intervals(&self, horizon: T) -> Result<Vec<Interval<T>>> {
        if !(horizon > T::zero()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        let tol = horizon * T::lit(1e-12);
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let start = self.time(k).expect("interval start exists");
            if start >= horizon - tol {
                break;
            }
            let Some(mut end) = self.time(k + 1) else {
                return Err(Error::invalid("partition does not cover the horizon"));
            };
            if end > horizon - tol {
                end = horizon;
            }
            out.push(Interval {
                index: k,
                start,
                end,
                from_tail: k + 1 >= self.prefix.len(),
            });
            k += 1;
        }
        Ok(out)
    }
}

/// `T_k = (k−1)h`, `k = 1..count`, with uniform extension `h`.
pub fn make_uniform_partition<T: Scalar>(h: T, count: usize) -> Result<SamplingPartition<T>> {
    if !(h > T::zero()) {
        return Err(Error::invalid("partition step must be positive"));
    }
    if count == 0 {
        return Err(Error::invalid("partition needs at least one time"));
    }
    let times = (0..count).map(|k| h * T::lit(k as f64)).collect();
    SamplingPartition::new(times, Some(h))
}

/// Integrated path on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// Input applied at each grid point.
    pub controls: Vec<Vec<T>>,
    /// Time at which the state left the blow-up ball, if it did.
    pub escaped: Option<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn escaped(&self) -> bool {
        self.escaped.is_some()
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> T {
        self.times.last().copied().unwrap_or_else(T::zero)
    }
}
