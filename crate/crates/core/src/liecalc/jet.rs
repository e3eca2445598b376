//! Truncated multivariate Taylor series.
//!
//! A jet of order `d` in `n` variables stores the coefficients of every
//! monomial of total degree `≤ d`, laid out by degree. Monomials of one
//! degree always appear in the same relative order, so the layout of order
//! `d − 1` is a prefix of the layout of order `d` and truncation is slicing.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Highest jet order the evaluator will build.
pub const MAX_JET_ORDER: usize = 6;

#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    /// `degree_start[k]` is the index of the first monomial of degree `k`;
    /// `degree_start[order + 1]` is the total size.
    degree_start: Vec<usize>,
    /// `(i, j, k)` with `exps[i] + exps[j] = exps[k]`.
    mul: Vec<(u32, u32, u32)>,
    /// `deriv[v][a] = (index of a + e_v, a_v + 1)` for `|a| < order`.
    deriv: Vec<Vec<(usize, u32)>>,
}

fn monomials_of_degree(nvars: usize, deg: usize) -> Vec<Vec<u8>> {
    fn rec(nvars: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == nvars - 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, deg, &mut Vec::with_capacity(nvars), &mut out);
    out
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(exps.len());
            exps.extend(monomials_of_degree(nvars, d));
        }
        degree_start.push(exps.len());
        let index: HashMap<&[u8], usize> = exps.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da = deg(a);
            for (j, b) in exps.iter().enumerate() {
                if da + deg(b) > order {
                    continue;
                }
                let s: Vec<u8> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                mul.push((i as u32, j as u32, index[s.as_slice()] as u32));
            }
        }

        let lower = if order == 0 { 0 } else { degree_start[order] };
        let deriv = (0..nvars)
            .map(|v| {
                (0..lower)
                    .map(|a| {
                        let mut s = exps[a].clone();
                        s[v] += 1;
                        (index[s.as_slice()], s[v] as u32)
                    })
                    .collect()
            })
            .collect();

        Self {
            nvars,
            order,
            exps,
            degree_start,
            mul,
            deriv,
        }
    }

    /// Shared layout for `(nvars, order)`.
    pub fn get(nvars: usize, order: usize) -> Result<Arc<JetLayout>> {
        if order > MAX_JET_ORDER {
            return Err(Error::invalid(format!(
                "jet order {order} exceeds the supported maximum {MAX_JET_ORDER}"
            )));
        }
        if nvars == 0 {
            return Err(Error::invalid("jets need at least one variable"));
        }
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    /// Index of a monomial given by its exponent vector.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let d: usize = exps.iter().map(|&v| v as usize).sum();
        if d > self.order || exps.len() != self.nvars {
            return None;
        }
        (self.degree_start[d]..self.degree_start[d + 1]).find(|&i| self.exps[i] == exps)
    }

    fn size_at(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }
}

/// Truncated Taylor expansion around a fixed point.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    layout: Arc<JetLayout>,
    c: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(layout: &Arc<JetLayout>, v: T) -> Self {
        let mut c = vec![T::zero(); layout.len()];
        c[0] = v;
        Self {
            layout: layout.clone(),
            c,
        }
    }

    /// The coordinate `x_var` expanded at `at`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, at: T) -> Self {
        let mut j = Self::constant(layout, at);
        if layout.order > 0 {
            j.c[1 + var] = T::one();
        }
        j
    }

    /// Jets of all coordinates at the point `x`.
    pub fn variables(x: &[T], order: usize) -> Result<Vec<Self>> {
        let layout = JetLayout::get(x.len(), order)?;
        Ok(x.iter().enumerate().map(|(i, &v)| Self::variable(&layout, i, v)).collect())
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Coefficient of the monomial with the given exponents (zero if it is
    /// beyond the truncation order).
    pub fn coeff(&self, exps: &[u8]) -> T {
        self.layout.index_of(exps).map_or(T::zero(), |i| self.c[i])
    }

    /// First partial derivatives at the expansion point.
    pub fn gradient(&self) -> Vec<T> {
        if self.layout.order == 0 {
            return vec![T::zero(); self.layout.nvars];
        }
        self.c[1..=self.layout.nvars].to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order >= self.layout.order {
            return Ok(self.clone());
        }
        let layout = JetLayout::get(self.layout.nvars, order)?;
        Ok(Self {
            c: self.c[..layout.size_at(order)].to_vec(),
            layout,
        })
    }

    /// `∂/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if self.layout.order == 0 {
            return Err(Error::invalid("cannot differentiate an order-0 jet"));
        }
        let layout = JetLayout::get(self.layout.nvars, self.layout.order - 1)?;
        let c = self.layout.deriv[var]
            .iter()
            .map(|&(idx, f)| self.c[idx] * T::lit(f as f64))
            .collect();
        Ok(Self { layout, c })
    }

    fn same_layout(&self, other: &Self) {
        debug_assert!(Arc::ptr_eq(&self.layout, &other.layout), "jet layouts differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_layout(other);
        Self {
            layout: self.layout.clone(),
            c: self.c.iter().zip(&other.c).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_layout(other);
        Self {
            layout: self.layout.clone(),
            c: self.c.iter().zip(&other.c).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            layout: self.layout.clone(),
            c: self.c.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_layout(other);
        let mut c = vec![T::zero(); self.c.len()];
        for &(i, j, k) in &self.layout.mul {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Self {
            layout: self.layout.clone(),
            c,
        }
    }

    /// `Σ t_k (self − self(0))^k`, i.e. composition with a univariate
    /// function whose Taylor coefficients at `self(0)` are `t`.
    fn compose(&self, t: &[T]) -> Self {
        let mut h = self.clone();
        h.c[0] = T::zero();
        let d = self.layout.order;
        let mut r = Self::constant(&self.layout, t[d]);
        for k in (0..d).rev() {
            r = r.mul(&h);
            r.c[0] += t[k];
        }
        r
    }

    fn factorials(d: usize) -> Vec<T> {
        let mut f = vec![T::one(); d + 1];
        for k in 1..=d {
            f[k] = f[k - 1] * T::lit(k as f64);
        }
        f
    }

    pub fn sin(&self) -> Self {
        let a = self.value();
        let (s, co) = (a.sin(), a.cos());
        let fact = Self::factorials(self.layout.order);
        let t: Vec<T> = (0..=self.layout.order)
            .map(|k| [s, co, -s, -co][k % 4] / fact[k])
            .collect();
        self.compose(&t)
    }

    pub fn cos(&self) -> Self {
        let a = self.value();
        let (s, co) = (a.sin(), a.cos());
        let fact = Self::factorials(self.layout.order);
        let t: Vec<T> = (0..=self.layout.order)
            .map(|k| [co, -s, -co, s][k % 4] / fact[k])
            .collect();
        self.compose(&t)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let fact = Self::factorials(self.layout.order);
        let t: Vec<T> = fact.iter().map(|&f| e / f).collect();
        self.compose(&t)
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let inv = T::one() / a;
        let mut t = Vec::with_capacity(self.layout.order + 1);
        let mut p = inv;
        for _ in 0..=self.layout.order {
            t.push(p);
            p = -p * inv;
        }
        self.compose(&t)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Self::constant(&self.layout, T::one());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_prefix_property() {
        let a = JetLayout::get(3, 4).unwrap();
        let b = JetLayout::get(3, 2).unwrap();
        assert_eq!(&a.exps[..b.len()], &b.exps[..]);
        // C(3 + 4, 4) monomials.
        assert_eq!(a.len(), 35);
    }

    #[test]
    fn product_of_variables() {
        // (x + y)² at (1, 2): value 9, gradient (6, 6), xy coefficient 2.
        let v = Jet::variables(&[1.0f64, 2.0], 2).unwrap();
        let s = v[0].add(&v[1]);
        let p = s.mul(&s);
        assert_eq!(p.value(), 9.0);
        assert_eq!(p.gradient(), vec![6.0, 6.0]);
        assert_eq!(p.coeff(&[1, 1]), 2.0);
        assert_eq!(p.coeff(&[2, 0]), 1.0);
    }

    #[test]
    fn univariate_series() {
        let x = Jet::variables(&[0.3f64], 5).unwrap().remove(0);
        let e = x.exp();
        for k in 0..=5u8 {
            let fact: f64 = (1..=k as u32).map(f64::from).product();
            assert!((e.coeff(&[k]) - 0.3f64.exp() / fact).abs() < 1e-14);
        }
        let s = x.sin();
        assert!((s.coeff(&[3]) + 0.3f64.cos() / 6.0).abs() < 1e-14);
        let r = x.recip();
        assert!((r.coeff(&[2]) - 1.0 / 0.3f64.powi(3)).abs() < 1e-10);
        let q = x.powi(-2);
        assert!((q.coeff(&[1]) + 2.0 / 0.3f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn derivative_lowers_order() {
        // x²y at (2, 3): ∂/∂x = 2xy → 12 with gradient (2y, 2x) = (6, 4).
        let v = Jet::variables(&[2.0f64, 3.0], 3).unwrap();
        let f = v[0].mul(&v[0]).mul(&v[1]);
        let d = f.derivative(0).unwrap();
        assert_eq!(d.order(), 2);
        assert_eq!(d.value(), 12.0);
        assert_eq!(d.gradient(), vec![6.0, 4.0]);
    }

    #[test]
    fn order_cap() {
        assert!(JetLayout::get(2, MAX_JET_ORDER + 1).is_err());
    }
}
