use crate::error::{Error, Result};
use crate::liecalc::{parse_predicate, Predicate};
use crate::scalar::Scalar;

/// Default numeric boundary band.
pub const BOUNDARY_TOL: f64 = 1e-7;

/// Open set `{x : predicate(x)} ∩ box`. Membership tests use the signed
/// margin of the predicate (see [`Predicate::margin`]) combined with the
/// distances to the box faces.
#[derive(Debug, Clone)]
pub struct Region {
    predicate: Predicate,
    lo: Vec<f64>,
    hi: Vec<f64>,
    tol: f64,
    source: Option<String>,
}

impl Region {
    pub fn new(predicate: Predicate, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n {
            return Err(Error::invalid("bounding box corners must have equal, positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::invalid("bounding box must be finite with lo < hi"));
        }
        if predicate.max_var().is_some_and(|v| v >= n) {
            return Err(Error::invalid("region predicate references a coordinate beyond the box"));
        }
        let r = Self {
            predicate,
            lo,
            hi,
            tol: BOUNDARY_TOL,
            source: None,
        };
        if r.contains(&vec![0.0f64; n]) {
            return Err(Error::PreconditionViolation("regions must exclude the origin".into()));
        }
        Ok(r)
    }

    /// Parses the predicate with the given variable names.
    pub fn parse(src: &str, vars: &[impl AsRef<str>], lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let mut r = Self::new(parse_predicate(src, vars)?, lo, hi)?;
        r.source = Some(src.to_string());
        Ok(r)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid("boundary tolerance must be positive"));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// Signed margin: positive inside, negative outside.
    pub fn margin<T: Scalar>(&self, x: &[T]) -> T {
        let mut m = self.predicate.margin(x);
        for (i, &v) in x.iter().enumerate() {
            m = m.min(v - T::lit(self.lo[i])).min(T::lit(self.hi[i]) - v);
        }
        m
    }

    /// Open-set membership.
    pub fn contains<T: Scalar>(&self, x: &[T]) -> bool {
        self.margin(x) > T::zero()
    }

    /// Inside with margin at least the boundary band.
    pub fn in_interior<T: Scalar>(&self, x: &[T]) -> bool {
        self.margin(x) > T::lit(self.tol)
    }

    /// Numeric closure: every needed atom holds up to the band.
    pub fn in_closure<T: Scalar>(&self, x: &[T]) -> bool {
        self.margin(x) >= -T::lit(self.tol)
    }
}
