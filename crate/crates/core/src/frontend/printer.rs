//! Pretty printer for the `.ebm` surface syntax. Output re-parses to the
//! same tree; parentheses are inserted only where precedence requires them.

use std::fmt::{self, Write};

use super::ast::*;

const MAPLET: u8 = 1;
const TYPE: u8 = 2;
const UNION: u8 = 3;
const INTER: u8 = 4;
const RESTRICT: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const POW: u8 = 8;
const ATOM: u8 = 9;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Maplet(..) => MAPLET,
        Expr::TypeCtor(..) => TYPE,
        Expr::Binary(op, ..) => binop_prec(*op),
        _ => ATOM,
    }
}

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Union | BinOp::SetMinus => UNION,
        BinOp::Inter => INTER,
        BinOp::DomRes | BinOp::DomSub | BinOp::RanRes | BinOp::RanSub => RESTRICT,
        BinOp::Add | BinOp::Sub => ADD,
        BinOp::Mul | BinOp::Div | BinOp::Mod => MUL,
        BinOp::Pow => POW,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let prec = expr_prec(e);
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Ident(n) => out.push_str(n),
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::EmptySet => out.push_str("{}"),
        Expr::SetLit(items) => {
            out.push('{');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x, 0);
            }
            out.push('}');
        }
        Expr::Maplet(a, b) => {
            write_expr(out, a, MAPLET);
            out.push_str(" |-> ");
            write_expr(out, b, MAPLET + 1);
        }
        Expr::TypeCtor(class, a, b) => {
            write_expr(out, a, TYPE);
            let _ = write!(out, " {} ", class.token());
            write_expr(out, b, TYPE + 1);
        }
        Expr::Binary(BinOp::Pow, a, b) => {
            write_expr(out, a, ATOM);
            out.push_str(" ^ ");
            write_expr(out, b, POW);
        }
        Expr::Binary(op, a, b) => {
            write_expr(out, a, prec);
            let _ = write!(out, " {} ", op.token());
            write_expr(out, b, prec + 1);
        }
        Expr::Unary(op, a) => {
            let _ = write!(out, "{}(", op.keyword());
            write_expr(out, a, 0);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

const P_QUANT: u8 = 0;
const P_IMPLIES: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_NOT: u8 = 4;
const P_CMP: u8 = 5;

fn pred_prec(p: &Pred) -> u8 {
    match p {
        Pred::Forall(..) | Pred::Exists(..) => P_QUANT,
        Pred::Implies(..) => P_IMPLIES,
        Pred::Or(..) => P_OR,
        Pred::And(..) => P_AND,
        Pred::Not(..) => P_NOT,
        Pred::Cmp(..) => P_CMP,
    }
}

fn write_pred(out: &mut String, p: &Pred, min: u8) {
    let prec = pred_prec(p);
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match p {
        Pred::Cmp(op, a, b) => {
            write_expr(out, a, 0);
            let _ = write!(out, " {} ", op.token());
            write_expr(out, b, 0);
        }
        Pred::And(a, b) => {
            write_pred(out, a, P_AND);
            out.push_str(" & ");
            write_pred(out, b, P_AND + 1);
        }
        Pred::Or(a, b) => {
            write_pred(out, a, P_OR);
            out.push_str(" or ");
            write_pred(out, b, P_OR + 1);
        }
        Pred::Implies(a, b) => {
            write_pred(out, a, P_IMPLIES + 1);
            out.push_str(" => ");
            write_pred(out, b, P_IMPLIES);
        }
        Pred::Not(a) => {
            out.push_str("not ");
            write_pred(out, a, P_NOT);
        }
        Pred::Forall(vars, body) | Pred::Exists(vars, body) => {
            out.push_str(if matches!(p, Pred::Forall(..)) {
                "forall "
            } else {
                "exists "
            });
            out.push_str(&vars.join(", "));
            out.push_str(" . ");
            write_pred(out, body, P_QUANT);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_pred(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.target.node, self.value)
    }
}

fn section<T: fmt::Display>(out: &mut String, header: &str, indent: &str, items: &[T]) {
    if items.is_empty() {
        return;
    }
    let _ = writeln!(out, "{indent}{header}");
    for item in items {
        let _ = writeln!(out, "{indent}  {item}");
    }
}

pub fn print_context(ctx: &Context) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "CONTEXT {}", ctx.name.node);
    let sets: Vec<&str> = ctx.carrier_sets.iter().map(|s| s.node.as_str()).collect();
    section(&mut out, "SETS", "", &sets);
    if !ctx.enumerated_sets.is_empty() {
        out.push_str("ENUM\n");
        for e in &ctx.enumerated_sets {
            let members: Vec<&str> = e.members.iter().map(|m| m.node.as_str()).collect();
            let _ = writeln!(out, "  {} = {{{}}}", e.name.node, members.join(", "));
        }
    }
    let consts: Vec<&str> = ctx.constants.iter().map(|s| s.node.as_str()).collect();
    section(&mut out, "CONSTANTS", "", &consts);
    let axioms: Vec<&Pred> = ctx.axioms.iter().map(|a| &a.node).collect();
    section(&mut out, "AXIOMS", "", &axioms);
    out.push_str("END\n");
    out
}

pub fn print_machine(m: &Machine) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "MACHINE {}", m.name.node);
    if let Some(sees) = &m.sees {
        let _ = writeln!(out, "SEES {}", sees.node);
    }
    let vars: Vec<&str> = m.variables.iter().map(|s| s.node.as_str()).collect();
    section(&mut out, "VARIABLES", "", &vars);
    let invs: Vec<&Pred> = m.invariants.iter().map(|a| &a.node).collect();
    section(&mut out, "INVARIANTS", "", &invs);
    let init: Vec<&Action> = m.initialisation.iter().map(|a| &a.node).collect();
    section(&mut out, "INITIALISATION", "", &init);
    for ev in &m.events {
        let _ = writeln!(out, "EVENT {}", ev.name.node);
        let guards: Vec<&Pred> = ev.guards.iter().map(|g| &g.node).collect();
        section(&mut out, "GUARDS", "  ", &guards);
        let actions: Vec<&Action> = ev.actions.iter().map(|a| &a.node).collect();
        section(&mut out, "ACTIONS", "  ", &actions);
        out.push_str("END\n");
    }
    out.push_str("END\n");
    out
}
