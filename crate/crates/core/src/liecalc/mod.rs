//! Vector-field calculus and pointwise stabilizability checks.

pub mod bracket;
pub mod conditions;
pub mod expr;
pub mod field;
pub mod jet;
pub mod parse;

pub use bracket::{bracket_basis, monomials_of_order, BracketTree};
pub use conditions::{
    check_corollary1_point, check_prop1_point, Clause, ConditionReport, FeedbackIntegrator, IntegratorRegion,
};
pub use expr::{CmpOp, Expr, Predicate};
pub use field::{lie_bracket, lie_derivative, parse_scalar_field, parse_vector_field, ScalarFieldExpr, VectorFieldExpr};
pub use jet::{Jet, JetLayout, MAX_JET_ORDER};
pub use parse::{default_vars, parse_expr, parse_predicate};
