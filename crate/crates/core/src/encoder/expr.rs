//! Expression and predicate encoding.

use std::collections::BTreeMap;

use super::EncodeError;
use crate::alloy::{AlloyExpr, BinaryOp, Decl, Mult, Quant};
use crate::frontend::{BinOp, CmpOp, Expr, Pred, RelClass, UnOp};
use crate::typing::{side_facts, type_of, type_of_set, unify, SideFact, Ty, TypeScope, TypedModel};

type R<T> = Result<T, EncodeError>;

/// Largest bitwidth for which `^` is expanded; the conditional chain has
/// one branch per non-negative exponent.
pub const MAX_POWER_BITWIDTH: u32 = 8;

/// Names bound by `let` around non-atomic power operands.
const POW_BASE: &str = "a'";
const POW_EXP: &str = "b'";

fn unsupported(e: impl ToString, reason: &str) -> EncodeError {
    EncodeError::Unsupported {
        expr: e.to_string(),
        reason: reason.to_string(),
    }
}

fn pair_parts(t: &Ty) -> (Ty, Ty) {
    match t {
        Ty::Pair(a, b) => ((**a).clone(), (**b).clone()),
        _ => (Ty::Unknown, Ty::Unknown),
    }
}

fn elem(t: &Ty) -> Ty {
    t.elem().cloned().unwrap_or(Ty::Unknown)
}

fn rel_parts(t: &Ty) -> (Ty, Ty) {
    pair_parts(&elem(t))
}

/// `e.univ.univ...`, `n` times.
fn join_univ_right(e: AlloyExpr, n: usize) -> AlloyExpr {
    (0..n).fold(e, |acc, _| AlloyExpr::join(acc, AlloyExpr::Univ))
}

fn join_univ_left(e: AlloyExpr, n: usize) -> AlloyExpr {
    (0..n).fold(e, |acc, _| AlloyExpr::join(AlloyExpr::Univ, acc))
}

/// `univ -> univ -> ...` of the given arity.
fn univ_power(n: usize) -> AlloyExpr {
    (1..n).fold(AlloyExpr::Univ, |acc, _| AlloyExpr::product(acc, AlloyExpr::Univ))
}

/// Domain of a relation whose tuples split into `wx` and `wy` columns.
pub fn dom_of(r: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wx == 1 && wy == 1 {
        AlloyExpr::call("dom", vec![r])
    } else {
        join_univ_right(r, wy)
    }
}

pub fn ran_of(r: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wx == 1 && wy == 1 {
        AlloyExpr::call("ran", vec![r])
    } else {
        join_univ_left(r, wx)
    }
}

fn dom_restrict(s: AlloyExpr, r: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wx == 1 {
        AlloyExpr::binary(BinaryOp::DomRes, s, r)
    } else {
        AlloyExpr::binary(BinaryOp::Inter, r, AlloyExpr::product(s, univ_power(wy)))
    }
}

fn ran_restrict(r: AlloyExpr, s: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wy == 1 {
        AlloyExpr::binary(BinaryOp::RanRes, r, s)
    } else {
        AlloyExpr::binary(BinaryOp::Inter, r, AlloyExpr::product(univ_power(wx), s))
    }
}

/// `S <<| r` as `(dom[r] - S) <: r`.
fn dom_subtract(s: AlloyExpr, r: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wx == 1 {
        let keep = AlloyExpr::binary(BinaryOp::Diff, dom_of(r.clone(), wx, wy), s);
        AlloyExpr::binary(BinaryOp::DomRes, keep, r)
    } else {
        AlloyExpr::binary(BinaryOp::Diff, r, AlloyExpr::product(s, univ_power(wy)))
    }
}

/// `r |>> S` as `r :> (ran[r] - S)`.
fn ran_subtract(r: AlloyExpr, s: AlloyExpr, wx: usize, wy: usize) -> AlloyExpr {
    if wy == 1 {
        let keep = AlloyExpr::binary(BinaryOp::Diff, ran_of(r.clone(), wx, wy), s);
        AlloyExpr::binary(BinaryOp::RanRes, r, keep)
    } else {
        AlloyExpr::binary(BinaryOp::Diff, r, AlloyExpr::product(univ_power(wx), s))
    }
}

/// Conditional chain for `a ^ b`: one branch per exponent from 0 to the
/// largest non-negative integer at `bitwidth`, then 0 for negative `b`.
pub fn power_chain(a: AlloyExpr, b: AlloyExpr, bitwidth: u32) -> R<AlloyExpr> {
    if bitwidth == 0 || bitwidth > MAX_POWER_BITWIDTH {
        return Err(unsupported(
            format!("{a} ^ {b}"),
            &format!("power is expanded only for bitwidths 1 to {MAX_POWER_BITWIDTH}"),
        ));
    }
    let atomic = |e: &AlloyExpr| matches!(e, AlloyExpr::Name(_) | AlloyExpr::Int(_));
    let mut binds = Vec::new();
    let base = if atomic(&a) {
        a
    } else {
        binds.push((POW_BASE.to_string(), a));
        AlloyExpr::name(POW_BASE)
    };
    let exp = if atomic(&b) {
        b
    } else {
        binds.push((POW_EXP.to_string(), b));
        AlloyExpr::name(POW_EXP)
    };
    let max = (1i64 << (bitwidth - 1)) - 1;
    let mut terms = vec![AlloyExpr::Int(1)];
    for k in 1..=max {
        let t = if k == 1 {
            base.clone()
        } else {
            AlloyExpr::call("mul", vec![base.clone(), terms[k as usize - 1].clone()])
        };
        terms.push(t);
    }
    let mut chain = AlloyExpr::Int(0);
    for k in (0..=max).rev() {
        let cond = AlloyExpr::eq(exp.clone(), AlloyExpr::Int(k));
        chain = AlloyExpr::if_else(cond, terms[k as usize].clone(), chain);
    }
    Ok(if binds.is_empty() {
        chain
    } else {
        AlloyExpr::Let(binds, Box::new(chain))
    })
}

/// Multiplicities of the arrow that encodes a function class.
pub fn class_arrow(class: RelClass) -> (Option<Mult>, Option<Mult>) {
    let facts = side_facts(class);
    let has = |f| facts.contains(&f);
    let right = match (has(SideFact::Functional), has(SideFact::Total)) {
        (true, true) => Some(Mult::One),
        (true, false) => Some(Mult::Lone),
        _ => None,
    };
    let left = if has(SideFact::Surjective) {
        Some(Mult::Some)
    } else if has(SideFact::Injective) {
        Some(Mult::Lone)
    } else {
        None
    };
    (left, right)
}

/// Identifier paths and types in scope while encoding one expression,
/// predicate, or event.
#[derive(Clone, Debug)]
pub struct EncodeContext {
    scope: TypeScope,
    paths: BTreeMap<String, AlloyExpr>,
    locals: Vec<String>,
    bitwidth: u32,
}

impl EncodeContext {
    /// Identifiers without a path encode as plain names.
    pub fn new(scope: TypeScope, bitwidth: u32) -> Self {
        EncodeContext {
            scope,
            paths: BTreeMap::new(),
            locals: Vec::new(),
            bitwidth,
        }
    }

    /// Context for a typed model with variables read from `state`, or with
    /// no variables in scope when `state` is `None` (axioms, initialisation).
    pub fn for_model(tm: &TypedModel, state: Option<&str>, bitwidth: u32) -> Self {
        let mut ctx = EncodeContext::new(tm.scope(), bitwidth);
        for c in tm.types.constants.keys() {
            ctx.set_path(c, AlloyExpr::path("Consts", &[c]));
        }
        if let Some(s) = state {
            for (v, t) in &tm.types.variables {
                ctx.set_path(v, variable_path(s, v, t.is_scalar()));
            }
        }
        if tm.model.lookup("INT").is_some() {
            ctx.set_path("INT", AlloyExpr::name("Int"));
        }
        ctx
    }

    pub fn set_path(&mut self, name: &str, e: AlloyExpr) {
        self.paths.insert(name.to_string(), e);
    }

    pub fn push_local(&mut self, name: &str, ty: Ty) {
        self.scope.push(name, ty);
        self.locals.push(name.to_string());
    }

    pub fn depth(&self) -> usize {
        self.locals.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.scope.truncate(depth);
        self.locals.truncate(depth);
    }

    pub fn scope(&self) -> &TypeScope {
        &self.scope
    }

    pub fn bitwidth(&self) -> u32 {
        self.bitwidth
    }

    fn ident(&self, n: &str) -> AlloyExpr {
        if self.locals.iter().any(|l| l == n) {
            return AlloyExpr::name(n);
        }
        self.paths.get(n).cloned().unwrap_or_else(|| AlloyExpr::name(n))
    }

    fn ty(&self, e: &Expr) -> R<Ty> {
        Ok(type_of(e, &self.scope)?)
    }

    /// Type of `e` refined by what the context expects.
    fn refine(&self, e: &Expr, hint: &Ty) -> R<Ty> {
        let t = self.ty(e)?;
        Ok(unify(&t, hint).unwrap_or(t))
    }

    /// Encodes a value expression. Empty sets take their arity from the
    /// inferred type.
    pub fn encode_expr(&mut self, e: &Expr) -> R<AlloyExpr> {
        let t = self.ty(e)?;
        self.expr(e, &t)
    }

    /// Encodes `e` where a value of type `want` is expected.
    pub fn encode_expr_as(&mut self, e: &Expr, want: &Ty) -> R<AlloyExpr> {
        let t = self.refine(e, want)?;
        self.expr(e, &t)
    }

    fn child(&mut self, e: &Expr, hint: Ty) -> R<(AlloyExpr, Ty)> {
        let t = self.refine(e, &hint)?;
        Ok((self.expr(e, &t)?, t))
    }

    fn expr(&mut self, e: &Expr, t: &Ty) -> R<AlloyExpr> {
        Ok(match e {
            Expr::Ident(n) => self.ident(n),
            Expr::Int(v) => AlloyExpr::Int(*v),
            Expr::EmptySet => AlloyExpr::empty(t.arity()),
            Expr::SetLit(items) => {
                let el = elem(t);
                if !el.is_tuple() {
                    return Err(unsupported(e, "set literals of sets need auxiliary atoms"));
                }
                let mut parts = Vec::with_capacity(items.len());
                for x in items {
                    parts.push(self.child(x, el.clone())?.0);
                }
                AlloyExpr::fold(BinaryOp::Union, parts).expect("set literal is non-empty")
            }
            Expr::Maplet(a, b) => {
                if !t.is_tuple() {
                    return Err(unsupported(e, "pairs with set components need auxiliary atoms"));
                }
                let (ta, tb) = pair_parts(t);
                let a = self.child(a, ta)?.0;
                let b = self.child(b, tb)?.0;
                AlloyExpr::product(a, b)
            }
            Expr::Unary(op, a) => self.unary(*op, a, t, e)?,
            Expr::Binary(op, a, b) => self.binary(*op, a, b, t)?,
            Expr::TypeCtor(..) => return Err(unsupported(e, "type constructors only encode as membership targets")),
        })
    }

    fn unary(&mut self, op: UnOp, a: &Expr, t: &Ty, whole: &Expr) -> R<AlloyExpr> {
        let hint = match op {
            UnOp::Dom => Ty::set(Ty::pair(elem(t), Ty::Unknown)),
            UnOp::Ran => Ty::set(Ty::pair(Ty::Unknown, elem(t))),
            UnOp::Prj1 | UnOp::Prj2 => Ty::set(pair_parts(&elem(t)).0),
            UnOp::Id => Ty::set(pair_parts(&elem(t)).0),
        };
        let (x, ta) = self.child(a, hint)?;
        Ok(match op {
            UnOp::Dom | UnOp::Ran => {
                let (l, r) = rel_parts(&ta);
                let (wx, wy) = (l.width(), r.width());
                if op == UnOp::Dom {
                    dom_of(x, wx, wy)
                } else {
                    ran_of(x, wx, wy)
                }
            }
            UnOp::Prj1 | UnOp::Prj2 => {
                let (l, r) = rel_parts(&ta);
                if l.width() != 1 || r.width() != 1 {
                    return Err(unsupported(whole, "projections apply to binary relations only"));
                }
                AlloyExpr::call(op.keyword(), vec![x])
            }
            UnOp::Id => {
                if elem(&ta).width() != 1 {
                    return Err(unsupported(whole, "identity applies to sets of single atoms only"));
                }
                AlloyExpr::call("id", vec![x])
            }
        })
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, t: &Ty) -> R<AlloyExpr> {
        let (l, r) = rel_parts(t);
        Ok(match op {
            BinOp::Union | BinOp::Inter | BinOp::SetMinus => {
                let (x, tx) = self.child(a, t.clone())?;
                let (y, _) = self.child(b, tx)?;
                let aop = match op {
                    BinOp::Union => BinaryOp::Union,
                    BinOp::Inter => BinaryOp::Inter,
                    _ => BinaryOp::Diff,
                };
                AlloyExpr::binary(aop, x, y)
            }
            BinOp::DomRes | BinOp::DomSub => {
                let (s, _) = self.child(a, Ty::set(l.clone()))?;
                let (rel, tr) = self.child(b, t.clone())?;
                let (x, y) = rel_parts(&tr);
                let (wx, wy) = (x.width(), y.width());
                if op == BinOp::DomRes {
                    dom_restrict(s, rel, wx, wy)
                } else {
                    dom_subtract(s, rel, wx, wy)
                }
            }
            BinOp::RanRes | BinOp::RanSub => {
                let (rel, tr) = self.child(a, t.clone())?;
                let (s, _) = self.child(b, Ty::set(r.clone()))?;
                let (x, y) = rel_parts(&tr);
                let (wx, wy) = (x.width(), y.width());
                if op == BinOp::RanRes {
                    ran_restrict(rel, s, wx, wy)
                } else {
                    ran_subtract(rel, s, wx, wy)
                }
            }
            _ => {
                let x = self.child(a, Ty::Int)?.0;
                let y = self.child(b, Ty::Int)?.0;
                let f = match op {
                    BinOp::Add => "plus",
                    BinOp::Sub => "minus",
                    BinOp::Mul => "mul",
                    BinOp::Div => "div",
                    BinOp::Mod => "rem",
                    _ => return power_chain(x, y, self.bitwidth),
                };
                AlloyExpr::call(f, vec![x, y])
            }
        })
    }

    /// Membership `x : A op B` as a multiplicity arrow. Operands must be
    /// plain sets of single atoms.
    fn type_membership(&mut self, x: &Expr, target: &Expr) -> R<AlloyExpr> {
        let Expr::TypeCtor(class, a, b) = target else {
            unreachable!("caller matched a type constructor")
        };
        let ta = type_of_set(a, &self.scope)?;
        let tb = type_of_set(b, &self.scope)?;
        let flat = |t: &Ty| elem(t).is_scalar() || elem(t) == Ty::Unknown;
        if matches!(**a, Expr::TypeCtor(..)) || matches!(**b, Expr::TypeCtor(..)) || !flat(&ta) || !flat(&tb) {
            return Err(unsupported(
                Pred::Cmp(CmpOp::In, x.clone(), target.clone()),
                "membership in a nested relation type",
            ));
        }
        let left = self.expr(a, &ta)?;
        let right = self.expr(b, &tb)?;
        let want = Ty::set(Ty::pair(elem(&ta), elem(&tb)));
        let lhs = self.encode_expr_as(x, &want)?;
        let (left_mult, right_mult) = class_arrow(*class);
        Ok(AlloyExpr::binary(
            BinaryOp::In,
            lhs,
            AlloyExpr::Product {
                left: Box::new(left),
                left_mult,
                right_mult,
                right: Box::new(right),
            },
        ))
    }

    pub fn encode_pred(&mut self, p: &Pred) -> R<AlloyExpr> {
        Ok(match p {
            Pred::Cmp(op, a, b) => match op {
                CmpOp::In | CmpOp::NotIn => {
                    let f = if matches!(b, Expr::TypeCtor(..)) {
                        self.type_membership(a, b)?
                    } else {
                        let ta = self.ty(a)?;
                        let tb = self.refine(b, &Ty::set(ta.clone()))?;
                        let ta = unify(&ta, &elem(&tb)).unwrap_or(ta);
                        if !ta.is_tuple() {
                            return Err(unsupported(p, "membership of a set value needs auxiliary atoms"));
                        }
                        let x = self.expr(a, &ta)?;
                        let s = self.expr(b, &tb)?;
                        AlloyExpr::binary(BinaryOp::In, x, s)
                    };
                    if *op == CmpOp::NotIn {
                        AlloyExpr::negate(f)
                    } else {
                        f
                    }
                }
                CmpOp::Eq | CmpOp::Neq | CmpOp::Subset => {
                    let t = unify(&self.ty(a)?, &self.ty(b)?).unwrap_or(Ty::Unknown);
                    let x = self.encode_expr_as(a, &t)?;
                    let y = self.encode_expr_as(b, &t)?;
                    match op {
                        CmpOp::Eq => AlloyExpr::eq(x, y),
                        CmpOp::Neq => AlloyExpr::negate(AlloyExpr::eq(x, y)),
                        _ => AlloyExpr::binary(BinaryOp::In, x, y),
                    }
                }
                CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                    let x = self.encode_expr_as(a, &Ty::Int)?;
                    let y = self.encode_expr_as(b, &Ty::Int)?;
                    let aop = match op {
                        CmpOp::Lt => BinaryOp::Lt,
                        CmpOp::Le => BinaryOp::Le,
                        CmpOp::Gt => BinaryOp::Gt,
                        _ => BinaryOp::Ge,
                    };
                    AlloyExpr::binary(aop, x, y)
                }
            },
            Pred::And(a, b) => AlloyExpr::and(self.encode_pred(a)?, self.encode_pred(b)?),
            Pred::Or(a, b) => AlloyExpr::or(self.encode_pred(a)?, self.encode_pred(b)?),
            Pred::Implies(a, b) => AlloyExpr::binary(BinaryOp::Implies, self.encode_pred(a)?, self.encode_pred(b)?),
            Pred::Not(a) => AlloyExpr::negate(self.encode_pred(a)?),
            Pred::Forall(vars, body) | Pred::Exists(vars, body) => self.quantifier(p, vars, body)?,
        })
    }

    /// Quantifiers bind each variable to the domain read from its defining
    /// membership conjunct; those conjuncts are dropped from the body.
    fn quantifier(&mut self, whole: &Pred, vars: &[String], body: &Pred) -> R<AlloyExpr> {
        let universal = matches!(whole, Pred::Forall(..));
        let (domains, rest) =
            split_domains(vars, body, universal).ok_or_else(|| unsupported(whole, "a bound variable has no domain"))?;
        let depth = self.depth();
        let mut decls = Vec::with_capacity(vars.len());
        for (v, d) in vars.iter().zip(domains) {
            let t = self.ty(d)?;
            decls.push(Decl::new(&[v], self.expr(d, &t)?));
            self.push_local(v, elem(&t));
        }
        let body = rest.map(|p| self.encode_pred(&p)).transpose();
        self.truncate(depth);
        let body = body?.unwrap_or_else(truth);
        Ok(AlloyExpr::Quant(
            if universal { Quant::All } else { Quant::Some },
            decls,
            Box::new(body),
        ))
    }
}

/// A formula that always holds.
pub fn truth() -> AlloyExpr {
    AlloyExpr::unary(crate::alloy::UnaryOp::Mult(Quant::No), AlloyExpr::None)
}

/// Domains of the quantified variables and the remaining body, or `None`
/// when some variable has no defining conjunct.
fn split_domains<'a>(vars: &[String], body: &'a Pred, universal: bool) -> Option<(Vec<&'a Expr>, Option<Pred>)> {
    let (guard, consequent) = match (universal, body) {
        (true, Pred::Implies(a, c)) => (&**a, Some(&**c)),
        (true, _) => return None,
        (false, b) => (b, None),
    };
    let conjuncts = guard.conjuncts();
    let mut used = vec![false; conjuncts.len()];
    let mut domains = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let found = conjuncts.iter().enumerate().find_map(|(k, c)| match c.as_membership() {
            Some((x, e)) if x == v && !used[k] => {
                let mut later = false;
                e.for_each_ident(&mut |n| later |= vars[i..].iter().any(|w| w == n));
                (!later).then_some((k, e))
            }
            _ => None,
        });
        let (k, e) = found?;
        used[k] = true;
        domains.push(e);
    }
    let remaining = conjuncts
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(c, _)| (*c).clone())
        .reduce(Pred::and);
    let rest = match (remaining, consequent) {
        (Some(g), Some(c)) => Some(Pred::implies(g, c.clone())),
        (None, Some(c)) => Some(c.clone()),
        (g, None) => g,
    };
    Some((domains, rest))
}

/// `s.v.rel` for relational variables, `s.v` for scalars.
pub fn variable_path(state: &str, var: &str, scalar: bool) -> AlloyExpr {
    if scalar {
        AlloyExpr::path(state, &[var])
    } else {
        AlloyExpr::path(state, &[var, "rel"])
    }
}
