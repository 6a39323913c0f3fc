//! Fixtures shared by the benchmarks.

use eventb_alloy::corpus;
use eventb_alloy::frontend::{parse_machine, Model};
use eventb_alloy::typing::TypedModel;

/// Parses and types a corpus machine.
pub fn typed(name: &str) -> TypedModel {
    let src = corpus::source(name).expect("corpus machine");
    let (m, c) = parse_machine(src).expect("corpus parses");
    TypedModel::new(Model::new(m, c).expect("corpus validates")).expect("corpus types")
}
