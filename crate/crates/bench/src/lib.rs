//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use holohje::hamparse::{build_h, parse, BuildOptions, HamiltonianAst};
use holohje::pfaffian::HolonomicFunction;
use holohje::ring::{NumPoint, VarContext};

pub const EXAMPLE: &str = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4";

pub fn example_ast() -> HamiltonianAst {
    parse(EXAMPLE, &VarContext::new(2, vec!["a".into(), "b".into()])).expect("example parses")
}

pub fn example_point() -> NumPoint {
    NumPoint::new(vec![PI / 6.0, 1.0, (PI / 6.0).powi(4), 2.0], vec![1.0, 1.0]).expect("finite point")
}

pub fn example_function() -> HolonomicFunction {
    build_h(&example_ast(), &example_point(), &BuildOptions::default()).expect("example builds").0
}
