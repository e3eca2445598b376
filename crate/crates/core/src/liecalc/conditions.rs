//! Pointwise stabilizability checks for `ẋ = f(x) + u·g(x)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::liecalc::bracket::{monomials_of_order, BracketTree};
use crate::liecalc::expr::Expr;
use crate::liecalc::field::{lie_derivative, ScalarFieldExpr, VectorFieldExpr};
use crate::liecalc::jet::Jet;
use crate::scalar::{norm, Scalar};
use crate::sysmodel::AffineSystem;

/// Relative zero tolerance for sign conditions.
pub const ZERO_TOL: f64 = 1e-9;

/// Largest `N` accepted by [`check_prop1_point`].
pub const MAX_N: usize = 4;

/// Which clause certified a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `(gV)(x) ≠ 0`.
    InputDerivative,
    /// `(gV)(x) = 0` and `(fV)(x) < 0`.
    DriftDecrease,
    /// `(f^{N+1}V)(x) < 0`.
    HigherDrift,
    /// `N` odd and `(ad_g^N f)V(x) ≠ 0`.
    OddBracket,
    /// `N` even and `(ad_g^N f)V(x) < 0`.
    EvenBracket,
    /// `(f^{N+1}V)(x) = 0` and `(ad_f^N g)V(x) ≠ 0`.
    DriftBracket,
    /// `DV·F < 0` on the first feedback-integrator region.
    IntegratorDecrease,
    /// `DV·F = 0` and `DV·∂F/∂y ≠ 0`.
    IntegratorBracket,
    /// `∂W/∂y ≠ 0` on the second region.
    IntegratorGradient,
    Fail,
}

impl Clause {
    /// Equation tag printed in reports.
    pub fn label(self) -> &'static str {
        match self {
            Clause::InputDerivative => "Eq.(30a)",
            Clause::DriftDecrease => "Eq.(30b)",
            Clause::HigherDrift => "P1",
            Clause::OddBracket => "P2",
            Clause::EvenBracket => "P3",
            Clause::DriftBracket => "P4",
            Clause::IntegratorDecrease => "Eq.(36a)",
            Clause::IntegratorBracket => "Eq.(36b)",
            Clause::IntegratorGradient => "Eq.(38)",
            Clause::Fail => "FAIL",
        }
    }

    pub fn is_fail(self) -> bool {
        self == Clause::Fail
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of a pointwise check with the quantities that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub point: Vec<f64>,
    pub clause: Clause,
    pub witnesses: Vec<(String, f64)>,
    /// `N` at which the higher-order search stopped.
    pub n_used: Option<usize>,
    /// Absolute zero tolerance that was applied.
    pub tolerance: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        !self.clause.is_fail()
    }

    pub fn witness(&self, name: &str) -> Option<f64> {
        self.witnesses.iter().find(|(n, _)| n == name).map(|w| w.1)
    }
}

/// `1e-9 · max(|V(x)|, |∇V(x)|∞)`, or `1e-9` when both vanish.
fn zero_tolerance(v: &ScalarFieldExpr, x: &[f64]) -> Result<f64> {
    let j: Jet<f64> = v.eval_jet(x, 1)?;
    let scale = j
        .gradient()
        .iter()
        .fold(j.value().abs(), |m, g| m.max(g.abs()));
    Ok(ZERO_TOL * if scale > 0.0 { scale } else { 1.0 })
}

fn apply_sequence(
    seq: &[BracketTree],
    f: &VectorFieldExpr,
    g: &VectorFieldExpr,
    v: &ScalarFieldExpr,
) -> Result<ScalarFieldExpr> {
    seq.iter()
        .rev()
        .try_fold(v.clone(), |acc, d| lie_derivative(&d.to_field(f, g)?, &acc))
}

fn sequence_name(seq: &[BracketTree]) -> String {
    let ops: Vec<String> = seq.iter().map(ToString::to_string).collect();
    format!("{}V", ops.join(""))
}

/// Classifies `x ≠ 0` by the first clause that holds: `gV ≠ 0`, then
/// `fV < 0`, then P1–P4 at orders `N = 1..=n_max`.
pub fn check_prop1_point<T: Scalar>(
    sys: &AffineSystem,
    v: &ScalarFieldExpr,
    x: &[T],
    n_max: usize,
) -> Result<ConditionReport> {
    if !(1..=MAX_N).contains(&n_max) {
        return Err(Error::invalid(format!("N_max must lie in 1..={MAX_N}")));
    }
    if v.dim() != sys.dim() || x.len() != sys.dim() {
        return Err(Error::invalid("system, function and point dimensions differ"));
    }
    let x: Vec<f64> = x.iter().map(|t| t.as_f64()).collect();
    if x.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("conditions are stated for x ≠ 0"));
    }
    let (f, g) = (sys.drift(), sys.input_field());
    let tol = zero_tolerance(v, &x)?;
    let mut report = ConditionReport {
        point: x.clone(),
        clause: Clause::Fail,
        witnesses: Vec::new(),
        n_used: None,
        tolerance: tol,
    };

    let gv = lie_derivative(g, v)?.eval(&x)?;
    report.witnesses.push(("gV".into(), gv));
    if gv.abs() > tol {
        report.clause = Clause::InputDerivative;
        return Ok(report);
    }
    let mut fj = lie_derivative(f, v)?;
    let fv = fj.eval(&x)?;
    report.witnesses.push(("fV".into(), fv));
    if fv < -tol {
        report.clause = Clause::DriftDecrease;
        return Ok(report);
    }

    for n in 1..=n_max {
        report.n_used = Some(n);
        // order-n clauses: f^n V (already evaluated as fj) and every bracket
        // monomial of total order n.
        let fnv = fj.eval(&x)?;
        if n > 1 {
            report.witnesses.push((format!("f^{n}V"), fnv));
        }
        if fnv.abs() > tol {
            return Ok(report);
        }
        for seq in monomials_of_order(n) {
            if seq.iter().all(|t| *t == BracketTree::F) {
                continue;
            }
            let val = apply_sequence(&seq, f, g, v)?.eval(&x)?;
            if val.abs() > tol {
                report.witnesses.push((sequence_name(&seq), val));
                return Ok(report);
            }
        }

        fj = lie_derivative(f, &fj)?;
        let next = fj.eval(&x)?;
        report.witnesses.push((format!("f^{}V", n + 1), next));
        if next < -tol {
            report.clause = Clause::HigherDrift;
            return Ok(report);
        }
        let adg = BracketTree::ad(BracketTree::F, BracketTree::G, n);
        let adg_v = lie_derivative(&adg.to_field(f, g)?, v)?.eval(&x)?;
        report.witnesses.push((format!("{adg}V"), adg_v));
        if n % 2 == 1 && adg_v.abs() > tol {
            report.clause = Clause::OddBracket;
            return Ok(report);
        }
        if n % 2 == 0 && adg_v < -tol {
            report.clause = Clause::EvenBracket;
            return Ok(report);
        }
        if next.abs() <= tol {
            let adf = BracketTree::ad(BracketTree::G, BracketTree::F, n);
            let adf_v = lie_derivative(&adf.to_field(f, g)?, v)?.eval(&x)?;
            report.witnesses.push((format!("{adf}V"), adf_v));
            if adf_v.abs() > tol {
                report.clause = Clause::DriftBracket;
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// `ẋ = F(x, y)`, `ẏ = u` on `ℝⁿ × ℝ`; `y` is the last coordinate.
#[derive(Debug, Clone)]
pub struct FeedbackIntegrator {
    map: Vec<Expr>,
}

/// The two regions of the feedback-integrator construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorRegion {
    D1,
    D2,
}

impl FeedbackIntegrator {
    /// `map` has `n` components over `n + 1` variables.
    pub fn new(map: Vec<Expr>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::invalid("F needs at least one component"));
        }
        if let Some(v) = map.iter().filter_map(Expr::max_var).max() {
            if v > n {
                return Err(Error::invalid("F references a coordinate beyond y"));
            }
        }
        let zero = vec![0.0f64; n + 1];
        let f0 = map.iter().map(|e| e.eval(&zero)).collect::<Vec<_>>();
        if !(norm(&f0) <= crate::sysmodel::EQUILIBRIUM_TOL) {
            return Err(Error::PreconditionViolation("F(0, 0) must vanish".into()));
        }
        Ok(Self { map })
    }

    /// Dimension `n` of `x`.
    pub fn dim_x(&self) -> usize {
        self.map.len()
    }

    /// The affine form `f = (F, 0)`, `g = (0, 1)`.
    pub fn as_affine(&self) -> Result<AffineSystem> {
        let n = self.dim_x();
        let mut fc = self.map.clone();
        fc.push(Expr::Const(0.0));
        let mut gc = vec![Expr::Const(0.0); n];
        gc.push(Expr::Const(1.0));
        AffineSystem::new(VectorFieldExpr::new(fc)?, VectorFieldExpr::new(gc)?)
    }

    fn eval_map(&self, p: &[f64], order: usize) -> Result<Vec<Jet<f64>>> {
        let vars = Jet::variables(p, order)?;
        Ok(self.map.iter().map(|e| e.eval_jet(&vars)).collect())
    }
}

/// Feedback-integrator conditions at `p = (x, y) ≠ 0`: decrease along `F`
/// (or the `∂F/∂y` term) on the first region, `∂W/∂y ≠ 0` on the second. `v` and `w` are functions of all `n + 1` variables.
pub fn check_corollary1_point<T: Scalar>(
    sys: &FeedbackIntegrator,
    v: &ScalarFieldExpr,
    w: &ScalarFieldExpr,
    region: IntegratorRegion,
    p: &[T],
) -> Result<ConditionReport> {
    let n = sys.dim_x();
    if p.len() != n + 1 || v.dim() != n + 1 || w.dim() != n + 1 {
        return Err(Error::invalid("point and functions must live on ℝⁿ × ℝ"));
    }
    let p: Vec<f64> = p.iter().map(|t| t.as_f64()).collect();
    if p.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("conditions are stated for (x, y) ≠ 0"));
    }
    let mut report = ConditionReport {
        point: p.clone(),
        clause: Clause::Fail,
        witnesses: Vec::new(),
        n_used: None,
        tolerance: 0.0,
    };
    match region {
        IntegratorRegion::D1 => {
            let tol = zero_tolerance(v, &p)?;
            report.tolerance = tol;
            let xnorm = norm(&p[..n]);
            report.witnesses.push(("|x|".into(), xnorm));
            if !(xnorm > tol) {
                return Ok(report);
            }
            let dv = v.gradient(&p)?;
            let fj = sys.eval_map(&p, 1)?;
            let dvf: f64 = (0..n).map(|i| dv[i] * fj[i].value()).sum();
            let dvfy: f64 = (0..n).map(|i| dv[i] * fj[i].gradient()[n]).sum();
            report.witnesses.push(("DV*F".into(), dvf));
            if dvf < -tol {
                report.clause = Clause::IntegratorDecrease;
                return Ok(report);
            }
            report.witnesses.push(("DV*dF/dy".into(), dvfy));
            if dvf.abs() <= tol && dvfy.abs() > tol {
                report.clause = Clause::IntegratorBracket;
            }
        }
        IntegratorRegion::D2 => {
            let tol = zero_tolerance(w, &p)?;
            report.tolerance = tol;
            let wy = w.gradient(&p)?[n];
            report.witnesses.push(("dW/dy".into(), wy));
            if wy.abs() <= tol {
                return Ok(report);
            }
            if p[..n].iter().all(|&c| c == 0.0) {
                let w0 = w.eval(&p)?;
                report.witnesses.push(("W(0,y)".into(), w0));
                if !(w0 > tol) {
                    return Ok(report);
                }
            }
            report.clause = Clause::IntegratorGradient;
        }
    }
    Ok(report)
}
