//! Exact arithmetic: rationals, multivariate polynomials over the variables
//! `x1..xn, p1..pn` followed by the free parameters, and their fraction field.

pub mod context;
pub mod gcd;
pub mod matrix;
pub mod monomial;
pub mod point;
pub mod poly;
pub mod ratfun;
pub mod span;
pub mod text;

pub use context::VarContext;
pub use gcd::{poly_gcd, poly_lcm};
pub use matrix::RfMatrix;
pub use monomial::{Monomial, MonomialOrder};
pub use point::{rf_eval, rf_eval_with, NumPoint, Precision, BASE_POINT_TOL, SINGULAR_TOL};
pub use poly::{fmt_q, q_to_f64, Poly};
pub use ratfun::RationalFunction;
pub use text::{parse_poly, parse_q, parse_rational_function};

/// Exact rational number.
pub type Q = num_rational::BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
