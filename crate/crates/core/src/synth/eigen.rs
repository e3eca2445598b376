//! Dense eigenvalue routines.
//!
//! The nonsymmetric path reduces to upper Hessenberg form with Householder
//! reflections and then runs the Francis double-shift QR iteration (the
//! EISPACK `hqr2` scheme as published in JAMA), accumulating the orthogonal
//! factor so the result is a real Schur decomposition `A = Z T Zᵀ`. Blocks of
//! `T` can be reordered with direct swaps, which is how stable invariant
//! subspaces are extracted.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::synth::matrix::Matrix;

/// Complex eigenvalue as a `(re, im)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue<T> {
    pub re: T,
    pub im: T,
}

/// Real Schur decomposition `A = Z T Zᵀ` with `T` quasi upper triangular.
#[derive(Debug, Clone)]
pub struct RealSchur<T> {
    pub t: Matrix<T>,
    pub z: Matrix<T>,
    /// Diagonal block sizes (1 or 2) from top-left to bottom-right.
    pub blocks: Vec<usize>,
}

/// Householder reduction to upper Hessenberg form. Returns `(H, Q)` with
/// `A = Q H Qᵀ`.
pub fn hessenberg<T: Scalar>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut v = Matrix::identity(n);
    if n < 3 {
        return (h, v);
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    for m in 1..high {
        let scale: T = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
    for m in (1..high).rev() {
        if h[(m, m - 1)] == T::zero() {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = T::zero();
            for i in m..=high {
                g += ort[i] * v[(i, j)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] += g * ort[i];
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = T::zero();
        }
    }
    (h, v)
}

/// Real Schur decomposition by Francis double-shift QR.
#[allow(unused_assignments)]
pub fn real_schur<T: Scalar>(a: &Matrix<T>) -> Result<RealSchur<T>> {
    if !a.is_square() {
        return Err(Error::invalid("Schur decomposition needs a square matrix"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let nn = a.rows();
    if nn == 0 {
        return Ok(RealSchur {
            t: a.clone(),
            z: a.clone(),
            blocks: vec![],
        });
    }
    let (mut h, mut v) = hessenberg(a);
    let zero = T::zero();
    let eps = T::epsilon();
    let mut exshift = zero;
    let (mut p, mut q, mut r, mut s, mut z) = (zero, zero, zero, zero, zero);
    let (mut w, mut x, mut y);

    let mut norm = zero;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    // (start index, size) of deflated blocks, recorded bottom-up.
    let mut blocks_rev: Vec<(usize, usize)> = Vec::with_capacity(nn);
    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = 100 * nn.max(4);

    while n >= 0 {
        let nu = n as usize;
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == zero {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            if nu > 0 {
                h[(nu, nu - 1)] = zero;
            }
            blocks_rev.push((nu, 1));
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / T::two();
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= zero {
                // Real pair: rotate to upper triangular.
                z = if p >= zero { p + z } else { p - z };
                let _ = x;
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in 0..nn {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = zero;
                blocks_rev.push((nu, 1));
                blocks_rev.push((nu - 1, 1));
            } else {
                blocks_rev.push((nu - 1, 2));
            }
            if nu >= 2 {
                h[(nu - 1, nu - 2)] = zero;
            }
            n -= 2;
            iter = 0;
        } else {
            total_iter += 1;
            if total_iter > max_total {
                return Err(Error::numerical(
                    "QR iteration did not converge within the iteration budget",
                ));
            }
            x = h[(nu, nu)];
            y = zero;
            w = zero;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / T::two();
                s = s * s + w;
                if s > zero {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / T::two() + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = zero;
                if i > m + 2 {
                    h[(i, i - 3)] = zero;
                }
            }

            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { zero };
                    x = p.abs() + q.abs() + r.abs();
                    if x == zero {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < zero {
                    s = -s;
                }
                if s != zero {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    for i in 0..nn {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    blocks_rev.sort_by_key(|&(start, _)| start);
    let blocks: Vec<usize> = blocks_rev.iter().map(|&(_, size)| size).collect();
    clean_below_blocks(&mut h, &blocks);
    Ok(RealSchur { t: h, z: v, blocks })
}

fn clean_below_blocks<T: Scalar>(t: &mut Matrix<T>, blocks: &[usize]) {
    let n = t.rows();
    let mut start = 0;
    for &size in blocks {
        for i in start..n {
            for j in start..(start + size).min(i + 1) {
                let inside = i < start + size;
                if !inside {
                    t[(i, j)] = T::zero();
                }
            }
        }
        start += size;
    }
}

impl<T: Scalar> RealSchur<T> {
    /// Eigenvalues in block order.
    pub fn eigenvalues(&self) -> Vec<Eigenvalue<T>> {
        let mut out = Vec::with_capacity(self.t.rows());
        let mut i = 0;
        for &size in &self.blocks {
            if size == 1 {
                out.push(Eigenvalue {
                    re: self.t[(i, i)],
                    im: T::zero(),
                });
            } else {
                let [a, b] = block_eigenvalues(&self.t, i);
                out.push(a);
                out.push(b);
            }
            i += size;
        }
        out
    }

    fn block_starts(&self) -> Vec<usize> {
        let mut starts = Vec::with_capacity(self.blocks.len());
        let mut s = 0;
        for &b in &self.blocks {
            starts.push(s);
            s += b;
        }
        starts
    }

    /// Real part of the eigenvalues carried by block `idx`.
    fn block_real_part(&self, idx: usize) -> T {
        let start = self.block_starts()[idx];
        if self.blocks[idx] == 1 {
            self.t[(start, start)]
        } else {
            (self.t[(start, start)] + self.t[(start + 1, start + 1)]) * T::half()
        }
    }

    /// Reorders the decomposition so every block whose eigenvalues satisfy
    /// `select` precedes every block that does not. Returns the dimension
    /// of the selected leading invariant subspace.
    pub fn reorder(&mut self, select: impl Fn(T) -> bool) -> Result<usize> {
        loop {
            let flags: Vec<bool> = (0..self.blocks.len())
                .map(|b| select(self.block_real_part(b)))
                .collect();
            let Some(pos) = (0..flags.len().saturating_sub(1)).find(|&b| !flags[b] && flags[b + 1])
            else {
                break;
            };
            let start = self.block_starts()[pos];
            let (p, q) = (self.blocks[pos], self.blocks[pos + 1]);
            swap_blocks(&mut self.t, &mut self.z, start, p, q)?;
            self.blocks.swap(pos, pos + 1);
        }
        let mut dim = 0;
        for b in 0..self.blocks.len() {
            if select(self.block_real_part(b)) {
                dim += self.blocks[b];
            } else {
                break;
            }
        }
        Ok(dim)
    }
}

fn block_eigenvalues<T: Scalar>(t: &Matrix<T>, i: usize) -> [Eigenvalue<T>; 2] {
    let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let mean = (a + d) * T::half();
    let disc = ((a - d) * T::half()).powi(2) + b * c;
    if disc >= T::zero() {
        let r = disc.sqrt();
        [
            Eigenvalue { re: mean + r, im: T::zero() },
            Eigenvalue { re: mean - r, im: T::zero() },
        ]
    } else {
        let im = (-disc).sqrt();
        [Eigenvalue { re: mean, im }, Eigenvalue { re: mean, im: -im }]
    }
}

/// Swaps the adjacent diagonal blocks of sizes `p` and `q` starting at
/// row `j` by an orthogonal similarity, updating `z` accordingly.
fn swap_blocks<T: Scalar>(
    t: &mut Matrix<T>,
    z: &mut Matrix<T>,
    j: usize,
    p: usize,
    q: usize,
) -> Result<()> {
    let n = t.rows();
    let a11 = t.block(j, j, p, p);
    let a12 = t.block(j, j + p, p, q);
    let a22 = t.block(j + p, j + p, q, q);
    // A11 X - X A22 = A12, column-major vectorization.
    let size = p * q;
    let mut k = Matrix::<T>::zeros(size, size);
    for col in 0..q {
        for row in 0..p {
            let r = row + p * col;
            for i in 0..p {
                k[(r, i + p * col)] += a11[(row, i)];
            }
            for l in 0..q {
                k[(r, row + p * l)] -= a22[(l, col)];
            }
        }
    }
    let rhs = Matrix::from_fn(size, 1, |r, _| a12[(r % p, r / p)]);
    let xv = k
        .solve(&rhs)
        .map_err(|_| Error::numerical("cannot swap Schur blocks with coincident eigenvalues"))?;
    let x = Matrix::from_fn(p, q, |r, c| xv[(r + p * c, 0)]);
    // Basis of the invariant subspace of A22: [-X; I].
    let m = (&x.scale(-T::one())).vstack(&Matrix::identity(q));
    let qm = householder_q(&m);
    let dim = p + q;

    let rows_block = t.block(j, 0, dim, n);
    let updated = &qm.transpose() * &rows_block;
    t.set_block(j, 0, &updated);
    let cols_block = t.block(0, j, n, dim);
    let updated = &cols_block * &qm;
    t.set_block(0, j, &updated);
    let zb = z.block(0, j, n, dim);
    let updated = &zb * &qm;
    z.set_block(0, j, &updated);

    // The new (p x q) lower-left block vanishes in exact arithmetic.
    let tol = T::lit(1e3) * T::epsilon() * (T::one() + t.max_abs());
    for r in j + q..j + dim {
        for c in j..j + q {
            if t[(r, c)].abs() > tol.max(T::lit(1e-6) * t.max_abs()) {
                return Err(Error::numerical("Schur block swap lost accuracy"));
            }
            t[(r, c)] = T::zero();
        }
    }
    Ok(())
}

/// Full orthogonal factor of the Householder QR of a tall matrix.
fn householder_q<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut q = Matrix::<T>::identity(rows);
    for k in 0..cols.min(rows - 1) {
        let norm: T = (k..rows).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (0..rows).map(|i| if i < k { T::zero() } else { a[(i, k)] }).collect();
        v[k] -= alpha;
        let vnorm2: T = v.iter().map(|&e| e * e).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        // a <- (I - 2vvᵀ/vᵀv) a
        for j in 0..cols {
            let d: T = (k..rows).map(|i| v[i] * a[(i, j)]).sum();
            let f = T::two() * d / vnorm2;
            for i in k..rows {
                a[(i, j)] -= f * v[i];
            }
        }
        // q <- q (I - 2vvᵀ/vᵀv)
        for i in 0..rows {
            let d: T = (k..rows).map(|l| q[(i, l)] * v[l]).sum();
            let f = T::two() * d / vnorm2;
            for l in k..rows {
                q[(i, l)] -= f * v[l];
            }
        }
    }
    q
}

/// All eigenvalues of a general real matrix.
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Eigenvalue<T>>> {
    Ok(real_schur(a)?.eigenvalues())
}

/// Maximum real part over the spectrum. `A` is Hurwitz iff this is negative.
pub fn spectral_abscissa<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let eig = eigenvalues(a)?;
    eig.iter()
        .map(|e| e.re)
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or_else(|| Error::invalid("empty matrix has no spectrum"))
}

pub fn is_hurwitz<T: Scalar>(a: &Matrix<T>) -> Result<bool> {
    Ok(spectral_abscissa(a)? < T::zero())
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::invalid("symmetric eigensolver needs a square matrix"));
    }
    let n = a.rows();
    let mut m = a.sym();
    let scale = m.frobenius_norm();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= T::epsilon() * scale || off == T::zero() {
            let mut d: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
            d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            return Ok(d);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::numerical("Jacobi eigensolver did not converge"))
}

pub fn min_max_symmetric_eigenvalue<T: Scalar>(a: &Matrix<T>) -> Result<(T, T)> {
    let e = symmetric_eigenvalues(a)?;
    match (e.first(), e.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::invalid("empty matrix")),
    }
}
