//! Expression trees over state coordinates.

use std::fmt;
use std::ops;

use crate::liecalc::jet::Jet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn powi(self, n: i32) -> Self {
        Expr::Pow(Box::new(self), n)
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(p), Some(q)) => Some(p.max(q)),
                    (p, q) => p.or(q),
                }
            }
        }
    }

    /// Plain evaluation. Variables beyond `x` read as NaN.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var(i) => x.get(*i).copied().unwrap_or_else(T::nan),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Taylor-mode evaluation; `vars` are the coordinate jets.
    pub fn eval_jet<T: Scalar>(&self, vars: &[Jet<T>]) -> Jet<T> {
        let layout = vars[0].layout();
        if layout.order() == 0 {
            // plain arithmetic keeps order-0 results bit-identical to eval
            let x: Vec<T> = vars.iter().map(Jet::value).collect();
            return Jet::constant(layout, self.eval(&x));
        }
        match self {
            Expr::Const(c) => Jet::constant(layout, T::lit(*c)),
            Expr::Var(i) => vars
                .get(*i)
                .cloned()
                .unwrap_or_else(|| Jet::constant(layout, T::nan())),
            Expr::Neg(a) => a.eval_jet(vars).neg(),
            Expr::Add(a, b) => a.eval_jet(vars).add(&b.eval_jet(vars)),
            Expr::Sub(a, b) => a.eval_jet(vars).sub(&b.eval_jet(vars)),
            Expr::Mul(a, b) => a.eval_jet(vars).mul(&b.eval_jet(vars)),
            Expr::Div(a, b) => a.eval_jet(vars).div(&b.eval_jet(vars)),
            Expr::Pow(a, n) => a.eval_jet(vars).powi(*n),
            Expr::Sin(a) => a.eval_jet(vars).sin(),
            Expr::Cos(a) => a.eval_jet(vars).cos(),
            Expr::Exp(a) => a.eval_jet(vars).exp(),
        }
    }

    /// Renders with the given variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { e: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

struct Named<'a> {
    e: &'a Expr,
    names: &'a [String],
}

impl Named<'_> {
    fn child(&self, e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Named { e, names: self.names };
        if e.precedence() < min {
            write!(f, "({n})")
        } else {
            write!(f, "{n}")
        }
    }
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => match self.names.get(*i) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{}", i + 1),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.child(a, 4, f)
            }
            Expr::Add(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " + ")?;
                self.child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " - ")?;
                self.child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.child(a, 2, f)?;
                write!(f, "*")?;
                self.child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.child(a, 2, f)?;
                write!(f, "/")?;
                self.child(b, 3, f)
            }
            Expr::Pow(a, n) => {
                self.child(a, 5, f)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Sin(a) => write!(f, "sin({})", Named { e: a, names: self.names }),
            Expr::Cos(a) => write!(f, "cos({})", Named { e: a, names: self.names }),
            Expr::Exp(a) => write!(f, "exp({})", Named { e: a, names: self.names }),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Named { e: self, names: &[] })
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Gt,
    Ne,
}

/// Boolean combination of strict comparisons. Each atom has a signed
/// margin that is positive exactly where it holds.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Cmp(Expr, CmpOp, Expr),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    /// Signed margin: `min` over conjunctions, `max` over disjunctions.
    pub fn margin<T: Scalar>(&self, x: &[T]) -> T {
        match self {
            Predicate::Cmp(l, op, r) => {
                let (a, b) = (l.eval(x), r.eval(x));
                match op {
                    CmpOp::Lt => b - a,
                    CmpOp::Gt => a - b,
                    CmpOp::Ne => (a - b).abs(),
                }
            }
            Predicate::And(p, q) => p.margin(x).min(q.margin(x)),
            Predicate::Or(p, q) => p.margin(x).max(q.margin(x)),
        }
    }

    /// Whether every atom needed holds with slack `m` (negative `m` relaxes).
    pub fn holds_with<T: Scalar>(&self, x: &[T], m: T) -> bool {
        self.margin(x) > m
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Predicate::Cmp(l, _, r) => match (l.max_var(), r.max_var()) {
                (Some(p), Some(q)) => Some(p.max(q)),
                (p, q) => p.or(q),
            },
            Predicate::And(p, q) | Predicate::Or(p, q) => match (p.max_var(), q.max_var()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_display() {
        let x = Expr::var(0);
        let y = Expr::var(1);
        let e = x.clone() * y.clone() - Expr::constant(2.0) * x.powi(2).sin();
        assert!((e.eval(&[1.0f64, 3.0]) - (3.0 - 2.0 * 1f64.sin())).abs() < 1e-15);
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(e.display(&names).to_string(), "x*y - 2*sin(x^2)");
        assert_eq!(e.max_var(), Some(1));
    }

    #[test]
    fn jet_matches_plain() {
        let e = (Expr::var(0).exp() / (Expr::var(1) + Expr::constant(3.0))).cos();
        let x = [0.4f64, -0.7];
        let v = Jet::variables(&x, 3).unwrap();
        assert!((e.eval_jet(&v).value() - e.eval(&x)).abs() < 1e-15);
    }

    #[test]
    fn predicate_margins() {
        let p = Predicate::And(
            Box::new(Predicate::Cmp(Expr::var(0), CmpOp::Gt, Expr::constant(0.0))),
            Box::new(Predicate::Cmp(Expr::var(1), CmpOp::Lt, Expr::constant(1.0))),
        );
        assert_eq!(p.margin(&[0.5f64, 0.0]), 0.5);
        assert!(!p.holds_with(&[0.0f64, 0.0], 0.0));
        assert!(p.holds_with(&[0.0f64, 0.0], -1e-7));
    }
}
