//! Target-language model: syntax tree, printer, a parser for the emitted
//! subset, well-formedness checks, and a finite relational evaluator.

mod ast;
mod eval;
mod parser;
mod prelude;
mod printer;
mod validate;

pub use ast::*;
pub use eval::{
    difference, domain_restrict, eval_alloy_expr, intersection, join, product, range_restrict, transpose, union,
    AlloyEvalError, AlloyValue, Evaluator, Instance,
};
pub use parser::{parse_alloy_expr, parse_module, parse_paragraph, AlloyParseError};
pub use prelude::{prelude, PRELUDE_NAMES};
pub use printer::{print_expr, print_module, print_paragraph};
pub use validate::{validate_module, ModuleDiagnostic, ModuleDiagnosticKind, BUILTIN_NAMES};
