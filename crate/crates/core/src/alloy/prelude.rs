//! Set-theoretic helper functions written at the top of every generated
//! module, so the output depends on no library module besides ordering.

use super::ast::*;
use super::parser::parse_paragraph;

const PRELUDE: &[&str] = &[
    "fun dom[r : univ -> univ] : set univ { r.univ }",
    "fun ran[r : univ -> univ] : set univ { univ.r }",
    "fun domSub[s : set univ, r : univ -> univ] : univ -> univ { (dom[r] - s) <: r }",
    "fun ranSub[r : univ -> univ, s : set univ] : univ -> univ { r :> (ran[r] - s) }",
    "fun prj1[r : univ -> univ] : univ -> univ -> univ { {x : dom[r], y : ran[r], z : dom[r] | x -> y in r and z = x} }",
    "fun prj2[r : univ -> univ] : univ -> univ -> univ { {x : dom[r], y : ran[r], z : ran[r] | x -> y in r and z = y} }",
    "fun id[s : set univ] : univ -> univ { s <: iden }",
];

pub const PRELUDE_NAMES: &[&str] = &["dom", "ran", "domSub", "ranSub", "prj1", "prj2", "id"];

pub fn prelude() -> Vec<FunDecl> {
    PRELUDE
        .iter()
        .map(|src| match parse_paragraph(src) {
            Ok(Paragraph::Fun(f)) => f,
            other => unreachable!("prelude source is a function: {other:?}"),
        })
        .collect()
}
