//! Vector and scalar fields, Lie brackets and Lie derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::liecalc::expr::Expr;
use crate::liecalc::jet::Jet;
use crate::liecalc::parse::parse_expr;
use crate::scalar::Scalar;

/// Tolerance for `V(0) = 0` on Lyapunov candidates.
pub const ORIGIN_TOL: f64 = 1e-12;

#[derive(Debug)]
enum VfNode {
    Components(Vec<Expr>),
    Bracket(VectorFieldExpr, VectorFieldExpr),
}

/// Smooth vector field `ℝⁿ → ℝⁿ`, either given by component expressions or
/// as a Lie bracket of two fields.
#[derive(Clone)]
pub struct VectorFieldExpr {
    dim: usize,
    node: Arc<VfNode>,
}

impl fmt::Debug for VectorFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for VectorFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            VfNode::Components(c) => {
                write!(f, "(")?;
                for (i, e) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            VfNode::Bracket(x, y) => write!(f, "[{x}, {y}]"),
        }
    }
}

fn check_point<T>(dim: usize, x: &[T]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::invalid(format!(
            "point has dimension {}, field expects {dim}",
            x.len()
        )));
    }
    Ok(())
}

impl VectorFieldExpr {
    /// Field with the given components; variables must index below the
    /// number of components.
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::invalid("vector field needs at least one component"));
        }
        if let Some(v) = components.iter().filter_map(Expr::max_var).max() {
            if v >= dim {
                return Err(Error::invalid(format!(
                    "component references coordinate {} of a {dim}-dimensional field",
                    v + 1
                )));
            }
        }
        Ok(Self {
            dim,
            node: Arc::new(VfNode::Components(components)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> Option<&[Expr]> {
        match &*self.node {
            VfNode::Components(c) => Some(c),
            VfNode::Bracket(..) => None,
        }
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        check_point(self.dim, x)?;
        match &*self.node {
            VfNode::Components(c) => Ok(c.iter().map(|e| e.eval(x)).collect()),
            VfNode::Bracket(..) => Ok(self.eval_jets(x, 0)?.iter().map(Jet::value).collect()),
        }
    }

    /// Component jets of order `order` at `x`.
    pub fn eval_jets<T: Scalar>(&self, x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        check_point(self.dim, x)?;
        let vars = Jet::variables(x, order)?;
        self.jets_from(&vars, x, order)
    }

    fn jets_from<T: Scalar>(&self, vars: &[Jet<T>], x: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        match &*self.node {
            VfNode::Components(c) => Ok(c.iter().map(|e| e.eval_jet(vars)).collect()),
            VfNode::Bracket(a, b) => {
                // [X, Y]_i = Σ_j ∂_j Y_i · X_j − ∂_j X_i · Y_j
                let up = Jet::variables(x, order + 1)?;
                let xa = a.jets_from(&up, x, order + 1)?;
                let yb = b.jets_from(&up, x, order + 1)?;
                let xt: Vec<Jet<T>> = xa.iter().map(|j| j.truncate(order)).collect::<Result<_>>()?;
                let yt: Vec<Jet<T>> = yb.iter().map(|j| j.truncate(order)).collect::<Result<_>>()?;
                let mut out = Vec::with_capacity(self.dim);
                for i in 0..self.dim {
                    let mut acc = Jet::constant(vars[0].layout(), T::zero());
                    for j in 0..self.dim {
                        acc = acc
                            .add(&yb[i].derivative(j)?.mul(&xt[j]))
                            .sub(&xa[i].derivative(j)?.mul(&yt[j]));
                    }
                    out.push(acc);
                }
                Ok(out)
            }
        }
    }

    /// Jacobian `DX(x)` as rows.
    pub fn jacobian<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        Ok(self.eval_jets(x, 1)?.iter().map(Jet::gradient).collect())
    }
}

/// `[X, Y] = DY·X − DX·Y`.
pub fn lie_bracket(x: &VectorFieldExpr, y: &VectorFieldExpr) -> Result<VectorFieldExpr> {
    if x.dim != y.dim {
        return Err(Error::invalid(format!(
            "cannot bracket fields of dimension {} and {}",
            x.dim, y.dim
        )));
    }
    Ok(VectorFieldExpr {
        dim: x.dim,
        node: Arc::new(VfNode::Bracket(x.clone(), y.clone())),
    })
}

#[derive(Debug)]
enum SfNode {
    Expr(Expr),
    Lie(VectorFieldExpr, ScalarFieldExpr),
    Product(ScalarFieldExpr, ScalarFieldExpr),
    Sum(ScalarFieldExpr, ScalarFieldExpr),
}

/// Smooth scalar field `ℝⁿ → ℝ`.
#[derive(Debug, Clone)]
pub struct ScalarFieldExpr {
    dim: usize,
    node: Arc<SfNode>,
}

impl fmt::Display for ScalarFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            SfNode::Expr(e) => write!(f, "{e}"),
            SfNode::Lie(x, v) => write!(f, "L_{x}({v})"),
            SfNode::Product(a, b) => write!(f, "({a})*({b})"),
            SfNode::Sum(a, b) => write!(f, "({a}) + ({b})"),
        }
    }
}

impl ScalarFieldExpr {
    pub fn new(dim: usize, e: Expr) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("scalar field dimension must be positive"));
        }
        if let Some(v) = e.max_var() {
            if v >= dim {
                return Err(Error::invalid(format!(
                    "expression references coordinate {} in dimension {dim}",
                    v + 1
                )));
            }
        }
        Ok(Self {
            dim,
            node: Arc::new(SfNode::Expr(e)),
        })
    }

    /// Like [`ScalarFieldExpr::new`] but also requires `V(0) = 0`.
    pub fn lyapunov_candidate(dim: usize, e: Expr) -> Result<Self> {
        let v = Self::new(dim, e)?;
        let v0: f64 = v.eval(&vec![0.0; dim])?;
        if !(v0.abs() <= ORIGIN_TOL) {
            return Err(Error::PreconditionViolation(format!(
                "Lyapunov candidate takes value {v0} at the origin"
            )));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &*self.node {
            SfNode::Expr(e) => Some(e),
            _ => None,
        }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            node: Arc::new(SfNode::Product(self.clone(), other.clone())),
        })
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            node: Arc::new(SfNode::Sum(self.clone(), other.clone())),
        })
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::invalid("scalar fields have different dimensions"));
        }
        Ok(())
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        check_point(self.dim, x)?;
        match &*self.node {
            SfNode::Expr(e) => Ok(e.eval(x)),
            _ => Ok(self.eval_jet(x, 0)?.value()),
        }
    }

    pub fn eval_jet<T: Scalar>(&self, x: &[T], order: usize) -> Result<Jet<T>> {
        check_point(self.dim, x)?;
        let vars = Jet::variables(x, order)?;
        self.jet_from(&vars, x, order)
    }

    fn jet_from<T: Scalar>(&self, vars: &[Jet<T>], x: &[T], order: usize) -> Result<Jet<T>> {
        match &*self.node {
            SfNode::Expr(e) => Ok(e.eval_jet(vars)),
            SfNode::Lie(field, v) => {
                let up = Jet::variables(x, order + 1)?;
                let vj = v.jet_from(&up, x, order + 1)?;
                let fj = field.jets_from(vars, x, order)?;
                let mut acc = Jet::constant(vars[0].layout(), T::zero());
                for (j, fjj) in fj.iter().enumerate() {
                    acc = acc.add(&vj.derivative(j)?.mul(fjj));
                }
                Ok(acc)
            }
            SfNode::Product(a, b) => Ok(a.jet_from(vars, x, order)?.mul(&b.jet_from(vars, x, order)?)),
            SfNode::Sum(a, b) => Ok(a.jet_from(vars, x, order)?.add(&b.jet_from(vars, x, order)?)),
        }
    }

    pub fn gradient<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.eval_jet(x, 1)?.gradient())
    }
}

/// `(XV)(x) = ∇V(x)·X(x)`.
pub fn lie_derivative(x: &VectorFieldExpr, v: &ScalarFieldExpr) -> Result<ScalarFieldExpr> {
    if x.dim != v.dim {
        return Err(Error::invalid(format!(
            "field of dimension {} cannot act on a function of {} variables",
            x.dim, v.dim
        )));
    }
    Ok(ScalarFieldExpr {
        dim: v.dim,
        node: Arc::new(SfNode::Lie(x.clone(), v.clone())),
    })
}

pub fn parse_vector_field(components: &[impl AsRef<str>], vars: &[impl AsRef<str>]) -> Result<VectorFieldExpr> {
    if components.len() != vars.len() {
        return Err(Error::invalid(format!(
            "{} components given for {} variables",
            components.len(),
            vars.len()
        )));
    }
    let exprs = components
        .iter()
        .map(|c| parse_expr(c.as_ref(), vars))
        .collect::<Result<Vec<_>>>()?;
    VectorFieldExpr::new(exprs)
}

pub fn parse_scalar_field(src: &str, vars: &[impl AsRef<str>]) -> Result<ScalarFieldExpr> {
    ScalarFieldExpr::new(vars.len(), parse_expr(src, vars)?)
}
