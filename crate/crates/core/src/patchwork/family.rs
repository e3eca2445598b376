use std::fmt;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liecalc::ScalarFieldExpr;
use crate::patchwork::region::Region;
use crate::sampling::box_points;
use crate::scalar::{norm, Scalar};

/// Candidate base offsets, searched in increasing order.
pub const C0_GRID: [f64; 10] = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0];
/// Candidate growth factors for `c_i = c₀(1 + iδ)`.
pub const DELTA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
/// Required gap between piece values at shared boundary points, in units
/// of the boundary band.
pub const SEPARATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Min,
    Max,
}

/// Monotone comparison function on `[0, ∞)`.
#[derive(Clone)]
pub enum Envelope {
    /// `coef · r^exp`.
    Power { coef: f64, exp: f64 },
    /// `combine_i parts_i(r) + shift` for `r > 0`, and `0` at `r = 0`.
    Shifted {
        parts: Vec<Envelope>,
        combine: Combine,
        shift: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Power { coef, exp } => write!(f, "{coef}*r^{exp}"),
            Envelope::Shifted { parts, combine, shift } => {
                write!(f, "{combine:?}{parts:?} + {shift}")
            }
            Envelope::Custom(_) => write!(f, "custom"),
        }
    }
}

impl Envelope {
    pub fn power(coef: f64, exp: f64) -> Self {
        Envelope::Power { coef, exp }
    }

    /// `a(s) = 2s`.
    pub fn double() -> Self {
        Envelope::power(2.0, 1.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Envelope::Power { coef, exp } => coef * r.powf(*exp),
            Envelope::Shifted { parts, combine, shift } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let vals = parts.iter().map(|p| p.eval(r));
                let base = match combine {
                    Combine::Min => vals.fold(f64::INFINITY, f64::min),
                    Combine::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                };
                base + shift
            }
            Envelope::Custom(f) => f(r),
        }
    }
}

/// `V_i` on region `A_i` with `ω₁(|x|) ≤ V_i(x) ≤ ω₂(|x|)`.
#[derive(Debug, Clone)]
pub struct LyapunovPiece {
    pub v: ScalarFieldExpr,
    pub region: Region,
    pub omega1: Envelope,
    pub omega2: Envelope,
}

impl LyapunovPiece {
    pub fn new(v: ScalarFieldExpr, region: Region, omega1: Envelope, omega2: Envelope) -> Result<Self> {
        if v.dim() != region.dim() {
            return Err(Error::invalid("piece and region dimensions differ"));
        }
        let v0: f64 = v.eval(&vec![0.0; v.dim()])?;
        if !(v0.abs() <= crate::liecalc::field::ORIGIN_TOL) {
            return Err(Error::PreconditionViolation(format!("V_i(0) = {v0} ≠ 0")));
        }
        Ok(Self {
            v,
            region,
            omega1,
            omega2,
        })
    }

    /// Checks the envelope sandwich at quasi-random points of the region's
    /// box that lie in the region; returns the first violating point.
    pub fn check_envelopes(&self, samples: usize, seed: u64) -> Result<()> {
        let (lo, hi) = self.region.bounds();
        for x in box_points::<f64>(lo, hi, samples, seed) {
            if !self.region.contains(&x) {
                continue;
            }
            let r = norm(&x);
            let v = self.v.eval(&x)?;
            let slack = 1e-12 * (1.0 + v.abs());
            if self.omega1.eval(r) > v + slack || v > self.omega2.eval(r) + slack {
                return Err(Error::PreconditionViolation(format!(
                    "envelope bounds fail at {x:?}: ω₁ = {}, V = {v}, ω₂ = {}",
                    self.omega1.eval(r),
                    self.omega2.eval(r)
                )));
            }
        }
        Ok(())
    }
}

/// Which rule of the patchwork definition produced a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Active {
    Origin,
    Interior(usize),
    /// Adjacent regions (closure contains the point) and the largest index
    /// attaining the maximum.
    Boundary {
        adjacent: Vec<usize>,
        index: usize,
        tie: bool,
    },
}

impl Active {
    /// Index whose piece defines `W` here.
    pub fn index(&self) -> Option<usize> {
        match self {
            Active::Origin => None,
            Active::Interior(i) => Some(*i),
            Active::Boundary { index, .. } => Some(*index),
        }
    }
}

/// Pieces with offsets `c_i > 0` and the derived envelopes.
#[derive(Debug, Clone)]
pub struct PatchworkFamily {
    pieces: Vec<LyapunovPiece>,
    offsets: Vec<f64>,
    schedule: Option<(f64, f64)>,
    a1: Envelope,
    a2: Envelope,
    comparison: Envelope,
}

impl PatchworkFamily {
    /// Family with explicitly given offsets (no separation guarantee).
    pub fn with_offsets(pieces: Vec<LyapunovPiece>, offsets: Vec<f64>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("a family needs at least one piece"));
        }
        if offsets.len() != pieces.len() {
            return Err(Error::invalid("one offset per piece is required"));
        }
        if offsets.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("offsets must be positive"));
        }
        let dim = pieces[0].region.dim();
        if pieces.iter().any(|p| p.region.dim() != dim) {
            return Err(Error::invalid("pieces live in different dimensions"));
        }
        let c_min = offsets.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = offsets.iter().copied().fold(0.0, f64::max);
        let a1 = Envelope::Shifted {
            parts: pieces.iter().map(|p| p.omega1.clone()).collect(),
            combine: Combine::Min,
            shift: c_min,
        };
        let a2 = Envelope::Shifted {
            parts: pieces.iter().map(|p| p.omega2.clone()).collect(),
            combine: Combine::Max,
            shift: c_max,
        };
        Ok(Self {
            pieces,
            offsets,
            schedule: None,
            a1,
            a2,
            comparison: Envelope::double(),
        })
    }

    pub fn with_comparison(mut self, a: Envelope) -> Self {
        self.comparison = a;
        self
    }

    pub fn pieces(&self) -> &[LyapunovPiece] {
        &self.pieces
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `(c₀, δ)` when the offsets came from the schedule search.
    pub fn schedule(&self) -> Option<(f64, f64)> {
        self.schedule
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].region.dim()
    }

    pub fn a1(&self) -> &Envelope {
        &self.a1
    }

    pub fn a2(&self) -> &Envelope {
        &self.a2
    }

    pub fn comparison(&self) -> &Envelope {
        &self.comparison
    }

    /// Largest boundary band among the regions.
    pub fn tol(&self) -> f64 {
        self.pieces.iter().map(|p| p.region.tol()).fold(0.0, f64::max)
    }

    /// `W_i(x) = V_i(x) + c_i`.
    pub fn piece_value<T: Scalar>(&self, i: usize, x: &[T]) -> Result<T> {
        Ok(self.pieces[i].v.eval(x)? + T::lit(self.offsets[i]))
    }

    /// Index of the first region containing `x` (open membership).
    pub fn open_region<T: Scalar>(&self, x: &[T]) -> Option<usize> {
        self.pieces.iter().position(|p| p.region.contains(x))
    }

    /// Regions whose numeric closure contains `x`.
    pub fn adjacent<T: Scalar>(&self, x: &[T]) -> Vec<usize> {
        adjacent_regions(&self.pieces, x)
    }

    /// Smallest box containing every region box.
    pub fn hull(&self) -> (Vec<f64>, Vec<f64>) {
        hull(&self.pieces)
    }
}

fn adjacent_regions<T: Scalar>(pieces: &[LyapunovPiece], x: &[T]) -> Vec<usize> {
    pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.region.in_closure(x))
        .map(|(i, _)| i)
        .collect()
}

fn hull(pieces: &[LyapunovPiece]) -> (Vec<f64>, Vec<f64>) {
    let n = pieces[0].region.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in pieces {
        let (l, h) = p.region.bounds();
        for i in 0..n {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(h[i]);
        }
    }
    (lo, hi)
}

/// A point on a shared boundary found by bisection between `inside`
/// (in the first region) and `outside`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub inside: Vec<f64>,
    pub outside: Vec<f64>,
    pub adjacent: Vec<usize>,
}

const BISECTION_STEPS: usize = 60;

/// Bisects the segment `[a, b]` for the exit point of region `i`.
pub(crate) fn bisect_exit(pieces: &[LyapunovPiece], i: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    for _ in 0..BISECTION_STEPS {
        let m: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
        if m == a || m == b {
            break;
        }
        if pieces[i].region.contains(&m) {
            a = m;
        } else {
            b = m;
        }
    }
    a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect()
}

/// Shared-boundary points found between consecutive sample points lying in
/// different regions. Only points adjacent to at least two regions are
/// kept.
pub fn boundary_samples(pieces: &[LyapunovPiece], points: &[Vec<f64>]) -> Vec<BoundarySample> {
    let first = |x: &[f64]| pieces.iter().position(|p| p.region.contains(x));
    let labels: Vec<Option<usize>> = points.par_iter().map(|x| first(x)).collect();
    let pairs: Vec<usize> = (0..points.len().saturating_sub(1))
        .filter(|&k| matches!((labels[k], labels[k + 1]), (Some(i), Some(j)) if i != j))
        .collect();
    pairs
        .par_iter()
        .filter_map(|&k| {
            let i = labels[k].expect("labelled");
            let p = bisect_exit(pieces, i, &points[k], &points[k + 1]);
            let adjacent = adjacent_regions(pieces, &p);
            (adjacent.len() >= 2 && p.iter().any(|&c| c != 0.0)).then(|| BoundarySample {
                point: p,
                inside: points[k].clone(),
                outside: points[k + 1].clone(),
                adjacent,
            })
        })
        .collect()
}

/// First pair of adjacent pieces whose offset values are not separated at
/// one of the given points.
fn first_collision(pieces: &[LyapunovPiece], offsets: &[f64], points: &[Vec<f64>], tol: f64) -> Result<Option<Vec<f64>>> {
    for x in points {
        let adj = adjacent_regions(pieces, x);
        let w: Vec<f64> = adj
            .iter()
            .map(|&i| Ok(pieces[i].v.eval(x)? + offsets[i]))
            .collect::<Result<_>>()?;
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                if !((w[a] - w[b]).abs() > SEPARATION_FACTOR * tol) {
                    return Ok(Some(x.clone()));
                }
            }
        }
    }
    Ok(None)
}

/// First point where `a(V_i) + c_i < 2a(V_i + c_i)` fails.
pub(crate) fn growth_violation(
    pieces: &[LyapunovPiece],
    offsets: &[f64],
    a: &Envelope,
    points: &[Vec<f64>],
) -> Result<Option<Vec<f64>>> {
    for x in points {
        for i in adjacent_regions(pieces, x) {
            let v = pieces[i].v.eval(x)?;
            let c = offsets[i];
            if !(a.eval(v) + c < 2.0 * a.eval(v + c)) {
                return Ok(Some(x.clone()));
            }
        }
    }
    Ok(None)
}

/// Searches `c_i = c₀(1 + iδ)` over [`C0_GRID`] × [`DELTA_GRID`] for
/// offsets that separate the piece values at every given boundary point.
pub fn choose_offsets_on(pieces: Vec<LyapunovPiece>, boundary: &[Vec<f64>]) -> Result<PatchworkFamily> {
    if pieces.is_empty() {
        return Err(Error::invalid("a family needs at least one piece"));
    }
    let tol = pieces.iter().map(|p| p.region.tol()).fold(0.0, f64::max);
    let a = Envelope::double();
    let mut last = None;
    for &c0 in &C0_GRID {
        for &delta in &DELTA_GRID {
            let offsets: Vec<f64> = (0..pieces.len()).map(|i| c0 * (1.0 + i as f64 * delta)).collect();
            if let Some(p) = first_collision(&pieces, &offsets, boundary, tol)? {
                last = Some(p);
                continue;
            }
            if let Some(p) = growth_violation(&pieces, &offsets, &a, boundary)? {
                last = Some(p);
                continue;
            }
            let mut fam = PatchworkFamily::with_offsets(pieces, offsets)?;
            fam.schedule = Some((c0, delta));
            return Ok(fam);
        }
    }
    Err(Error::OffsetSelection {
        point: last.unwrap_or_default(),
    })
}

/// Checks region disjointness on `samples` quasi-random points of the
/// regions' hull, collects shared-boundary points from the same sequence
/// and selects offsets with [`choose_offsets_on`].
pub fn choose_offsets(pieces: Vec<LyapunovPiece>, samples: usize, seed: u64) -> Result<PatchworkFamily> {
    if pieces.is_empty() {
        return Err(Error::invalid("a family needs at least one piece"));
    }
    let (lo, hi) = hull(&pieces);
    let pts = box_points::<f64>(&lo, &hi, samples, seed);
    if let Some(x) = pts
        .iter()
        .find(|x| pieces.iter().filter(|p| p.region.contains(x)).count() > 1)
    {
        return Err(Error::PreconditionViolation(format!("regions overlap at {x:?}")));
    }
    let boundary: Vec<Vec<f64>> = boundary_samples(&pieces, &pts).into_iter().map(|b| b.point).collect();
    let fam = choose_offsets_on(pieces, &boundary)?;
    if let Some(x) = growth_violation(fam.pieces(), fam.offsets(), fam.comparison(), &pts)? {
        return Err(Error::OffsetSelection { point: x });
    }
    Ok(fam)
}

/// The patchwork function: `W_i` inside `A_i`, the maximum of the adjacent
/// `W_j` on shared boundaries and `0` at the origin.
#[derive(Debug, Clone)]
pub struct PatchworkW {
    family: Arc<PatchworkFamily>,
}

impl PatchworkW {
    pub fn new(family: PatchworkFamily) -> Self {
        Self {
            family: Arc::new(family),
        }
    }

    pub fn family(&self) -> &PatchworkFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Value and the rule that produced it.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<(T, Active)> {
        let fam = &self.family;
        if x.len() != fam.dim() {
            return Err(Error::invalid("point has the wrong dimension"));
        }
        if x.iter().all(|v| v.is_zero()) {
            return Ok((T::zero(), Active::Origin));
        }
        if let Some(i) = fam.pieces.iter().position(|p| p.region.in_interior(x)) {
            return Ok((fam.piece_value(i, x)?, Active::Interior(i)));
        }
        let adjacent = fam.adjacent(x);
        if adjacent.is_empty() {
            return Err(Error::Uncovered {
                point: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        let vals: Vec<T> = adjacent
            .iter()
            .map(|&i| fam.piece_value(i, x))
            .collect::<Result<_>>()?;
        let best = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let band = T::lit(SEPARATION_FACTOR * fam.tol());
        let near: Vec<usize> = adjacent
            .iter()
            .zip(&vals)
            .filter(|(_, &v)| v >= best - band)
            .map(|(&i, _)| i)
            .collect();
        let index = *near.last().expect("maximum attained");
        let tie = near.len() > 1;
        if tie {
            warn!(
                "piece values within {} of each other at {:?}; distinctness violated, using index {}",
                band,
                x.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                index
            );
        }
        Ok((best, Active::Boundary { adjacent, index, tie }))
    }

    pub fn value<T: Scalar>(&self, x: &[T]) -> Result<T> {
        Ok(self.eval(x)?.0)
    }

    /// Active index at a boundary point.
    pub fn active_index<T: Scalar>(&self, x: &[T]) -> Result<usize> {
        match self.eval(x)?.1 {
            Active::Boundary { index, .. } => Ok(index),
            Active::Interior(i) => Err(Error::invalid(format!(
                "point is interior to region {i}; the active index is defined on boundaries"
            ))),
            Active::Origin => Err(Error::invalid("the origin has no active index")),
        }
    }
}
