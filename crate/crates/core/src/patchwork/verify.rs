use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::patchwork::family::{bisect_exit, boundary_samples, growth_violation, Active, BoundarySample, PatchworkW, SEPARATION_FACTOR};
use crate::sampling::{ball_points, box_points};
use crate::scalar::{distance, norm};

/// Radii used for the one-sided limit estimates.
pub const USC_RADII: [f64; 2] = [1e-4, 5e-5];
/// Largest endpoint perturbation for the active-index stability check.
pub const STABILITY_PERTURBATION: f64 = 1e-3;
/// Cap on boundary points used by the (more expensive) local checks.
pub const MAX_LOCAL_POINTS: usize = 400;

/// Outcome of a single verification property.
#[derive(Debug, Clone)]
pub struct PatchworkCheck {
    pub name: &'static str,
    pub label: &'static str,
    pub passed: bool,
    pub tested: usize,
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PatchworkReport {
    pub radius: f64,
    pub samples: usize,
    pub boundary_points: usize,
    pub checks: Vec<PatchworkCheck>,
}

impl PatchworkReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&PatchworkCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

fn check(name: &'static str, label: &'static str, tested: usize, witness: Option<Vec<f64>>, detail: String) -> PatchworkCheck {
    PatchworkCheck {
        name,
        label,
        passed: witness.is_none(),
        tested,
        witness,
        detail,
    }
}

/// First point (in sample order) for which `bad` returns an error message.
fn first_bad<F>(points: &[Vec<f64>], bad: F) -> Option<(Vec<f64>, String)>
where
    F: Fn(&[f64]) -> Option<String> + Sync,
{
    points
        .par_iter()
        .map(|x| bad(x).map(|m| (x.clone(), m)))
        .find_first(|r| r.is_some())
        .flatten()
}

/// Numerically checks the patchwork properties on `samples` quasi-random
/// points of the closed ball of radius `radius` and on the shared-boundary
/// points found between them.
pub fn verify_patchwork(w: &PatchworkW, radius: f64, samples: usize, seed: u64) -> Result<PatchworkReport> {
    if !(radius > 0.0 && radius.is_finite()) || samples < 2 {
        return Err(Error::invalid("verification needs a positive radius and at least two samples"));
    }
    let fam = w.family();
    let n = fam.dim();
    let tol = fam.tol();
    let band = SEPARATION_FACTOR * tol;
    let pts: Vec<Vec<f64>> = ball_points::<f64>(n, radius, samples, seed);
    let mut checks = Vec::new();

    let hit = first_bad(&pts, |x| {
        let inside: Vec<usize> = (0..fam.pieces().len())
            .filter(|&i| fam.pieces()[i].region.contains(x))
            .collect();
        (inside.len() > 1).then(|| format!("in regions {inside:?}"))
    });
    checks.push(summarize("disjointness", "Eq.(9a)", pts.len(), hit));

    let hit = first_bad(&pts, |x| {
        let zero = x.iter().all(|&v| v == 0.0);
        (!zero && fam.adjacent(x).is_empty()).then(|| "in no region closure".to_string())
    });
    checks.push(summarize("coverage", "Eq.(9b)", pts.len(), hit));

    let hit = first_bad(&pts, |x| {
        let r = norm(x);
        if r == 0.0 {
            return None;
        }
        let v = match w.value(x) {
            Ok(v) => v,
            Err(e) => return Some(e.to_string()),
        };
        let slack = 1e-12 * (1.0 + v.abs());
        let (lo, hi) = (fam.a1().eval(r), fam.a2().eval(r));
        (lo > v + slack || v > hi + slack).then(|| format!("a1 = {lo:e}, W = {v:e}, a2 = {hi:e}"))
    });
    checks.push(summarize("sandwich", "Eq.(2)", pts.len(), hit));

    let hit = first_bad(&pts, |x| {
        let zero = x.iter().all(|&v| v == 0.0);
        match w.value(x) {
            Ok(v) if zero && v != 0.0 => Some(format!("W(0) = {v:e}")),
            Ok(v) if !zero && !(v > 0.0) => Some(format!("W = {v:e}")),
            Ok(_) => None,
            Err(e) => Some(e.to_string()),
        }
    });
    let hit = hit.or_else(|| match w.value(&vec![0.0; n]) {
        Ok(v) if v == 0.0 => None,
        Ok(v) => Some((vec![0.0; n], format!("W(0) = {v:e}"))),
        Err(e) => Some((vec![0.0; n], e.to_string())),
    });
    checks.push(summarize("positivity", "Eq.(2)", pts.len() + 1, hit));

    let all_boundary = boundary_samples(fam.pieces(), &pts);
    let boundary: Vec<BoundarySample> = all_boundary
        .into_iter()
        .filter(|b| norm(&b.point) <= radius)
        .collect();
    let bpts: Vec<Vec<f64>> = boundary.iter().map(|b| b.point.clone()).collect();

    let hit = first_bad(&bpts, |x| {
        let adj = fam.adjacent(x);
        let vals: Vec<f64> = match adj.iter().map(|&i| fam.piece_value(i, x)).collect::<Result<_>>() {
            Ok(v) => v,
            Err(e) => return Some(e.to_string()),
        };
        for a in 0..vals.len() {
            for b in a + 1..vals.len() {
                if !((vals[a] - vals[b]).abs() > band) {
                    return Some(format!(
                        "W_{} = {:e}, W_{} = {:e}",
                        adj[a], vals[a], adj[b], vals[b]
                    ));
                }
            }
        }
        None
    });
    checks.push(summarize("distinctness", "Eq.(17)", bpts.len(), hit));

    let local: Vec<&BoundarySample> = boundary.iter().take(MAX_LOCAL_POINTS).collect();

    let usc = local
        .par_iter()
        .map(|b| usc_violation(w, b, band))
        .find_first(|r| r.is_some())
        .flatten();
    checks.push(summarize("usc", "Eq.(18)", local.len(), usc));

    let stab: Vec<(Option<(Vec<f64>, String)>, bool)> = local
        .par_iter()
        .enumerate()
        .map(|(k, b)| stability_violation(w, b, seed.wrapping_add(k as u64)))
        .collect();
    let tested = stab.iter().filter(|(_, used)| *used).count();
    let hit = stab.into_iter().find_map(|(h, _)| h);
    checks.push(summarize("active-index", "Eq.(24)", tested, hit));

    let mut growth_pts = pts.clone();
    growth_pts.extend(bpts.iter().cloned());
    let hit = growth_violation(fam.pieces(), fam.offsets(), fam.comparison(), &growth_pts)?
        .map(|x| (x, "a(V) + c >= 2a(V + c)".to_string()));
    checks.push(summarize("offset-growth", "Eq.(15c)", growth_pts.len(), hit));

    Ok(PatchworkReport {
        radius,
        samples,
        boundary_points: bpts.len(),
        checks,
    })
}

fn summarize(name: &'static str, label: &'static str, tested: usize, hit: Option<(Vec<f64>, String)>) -> PatchworkCheck {
    match hit {
        Some((x, msg)) => check(name, label, tested, Some(x), msg),
        None => check(name, label, tested, None, String::new()),
    }
}

/// One-sided limits of `W` at a boundary point along the rays toward the two
/// bisection endpoints, extrapolated to zero distance.
fn usc_violation(w: &PatchworkW, b: &BoundarySample, band: f64) -> Option<(Vec<f64>, String)> {
    let x = &b.point;
    let wx = match w.value(x) {
        Ok(v) => v,
        Err(e) => return Some((x.clone(), e.to_string())),
    };
    for end in [&b.inside, &b.outside] {
        let d = distance(end, x);
        if d == 0.0 {
            continue;
        }
        let at = |r: f64| -> Result<f64> {
            let y: Vec<f64> = x.iter().zip(end).map(|(p, q)| p + r * (q - p) / d).collect();
            w.value(&y)
        };
        let (w1, w2) = match (at(USC_RADII[0]), at(USC_RADII[1])) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Some((x.clone(), e.to_string())),
        };
        // linear Richardson step with ratio 2
        let limit = 2.0 * w2 - w1;
        if limit > wx + band {
            return Some((x.clone(), format!("one-sided limit {limit:e} exceeds W = {wx:e}")));
        }
    }
    None
}

/// Re-bisects between perturbed endpoints and compares active indices of
/// nearby points on the same boundary set. The flag reports whether a
/// comparison was made.
fn stability_violation(w: &PatchworkW, b: &BoundarySample, seed: u64) -> (Option<(Vec<f64>, String)>, bool) {
    let fam = w.family();
    let n = b.point.len();
    let Ok((_, Active::Boundary { adjacent, index, .. })) = w.eval(&b.point) else {
        return (None, false);
    };
    let Some(i) = fam.open_region(&b.inside) else {
        return (None, false);
    };
    let unit = vec![-1.0; n];
    let ones = vec![1.0; n];
    let jitter = box_points::<f64>(&unit, &ones, 3, seed);
    let mut scale = STABILITY_PERTURBATION;
    for _ in 0..6 {
        let a: Vec<f64> = b.inside.iter().zip(&jitter[1]).map(|(p, j)| p + scale * j).collect();
        let c: Vec<f64> = b.outside.iter().zip(&jitter[2]).map(|(p, j)| p + scale * j).collect();
        if !fam.pieces()[i].region.contains(&a) {
            scale *= 0.5;
            continue;
        }
        let y = bisect_exit(fam.pieces(), i, &a, &c);
        if distance(&y, &b.point) > STABILITY_PERTURBATION {
            scale *= 0.5;
            continue;
        }
        return match w.eval(&y) {
            Ok((wy, Active::Boundary { adjacent: ay, index: iy, .. })) if ay == adjacent => {
                let wi = fam.piece_value(index, &y).unwrap_or(f64::NAN);
                if iy != index {
                    (Some((y, format!("active index {iy} differs from {index}"))), true)
                } else if wy != wi {
                    (Some((y, format!("W = {wy:e} but W_I = {wi:e}"))), true)
                } else {
                    (None, true)
                }
            }
            Ok(_) => (None, false),
            Err(e) => (Some((y, e.to_string())), true),
        };
    }
    (None, false)
}
