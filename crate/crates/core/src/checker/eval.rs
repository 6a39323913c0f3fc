//! Reference set-theoretic semantics of Event-B expressions and predicates
//! over finite values.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{quantifier_domains, BinOp, CmpOp, Expr, Pred, RelClass, UnOp};
use crate::typing::{side_facts, SideFact, TypeTerm};
use crate::value::{int_range, wrap_int, Elem, Value};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound identifier '{0}'")]
    Unbound(String),
    #[error("set literal '{0}' mixes element kinds")]
    Heterogeneous(String),
    #[error("'{expr}' is not well defined: {reason}")]
    NotWellDefined { expr: String, reason: &'static str },
    #[error("'{expr}' should be {expected}")]
    Kind { expr: String, expected: &'static str },
    #[error("quantified variable '{0}' has no domain")]
    NoDomain(String),
}

type R<T> = Result<T, EvalError>;

/// Bindings for evaluation: globals (sets, members, constants, variables)
/// and a stack of locals (parameters, bound variables).
#[derive(Clone, Debug)]
pub struct Env {
    pub bitwidth: u32,
    globals: BTreeMap<String, Value>,
    locals: Vec<(String, Value)>,
}

impl Env {
    pub fn new(bitwidth: u32) -> Self {
        Env {
            bitwidth,
            globals: BTreeMap::new(),
            locals: Vec::new(),
        }
    }

    pub fn bind(&mut self, name: &str, v: Value) {
        self.globals.insert(name.to_string(), v);
    }

    pub fn push(&mut self, name: &str, v: Value) {
        self.locals.push((name.to_string(), v));
    }

    pub fn depth(&self) -> usize {
        self.locals.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.locals.truncate(depth);
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .or_else(|| self.globals.get(name))
    }
}

/// A carrier set of `n` elements named `<Set><i>`.
pub fn carrier_values(set: &str, n: u32) -> Value {
    Value::Set((0..n).map(|i| Value::Elem(Elem::indexed(set, i))).collect())
}

pub fn int_values(bitwidth: u32) -> Value {
    Value::Set(int_range(bitwidth).map(Value::Int).collect())
}

/// Whether two values could belong to the same set.
fn compatible(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Elem(x), Value::Elem(y)) => x.set() == y.set(),
        (Value::Int(_), Value::Int(_)) => true,
        (Value::Pair(a1, b1), Value::Pair(a2, b2)) => compatible(a1, a2) && compatible(b1, b2),
        (Value::Set(x), Value::Set(y)) => match (x.first(), y.first()) {
            (Some(p), Some(q)) => compatible(p, q),
            _ => true,
        },
        _ => false,
    }
}

fn set<'v>(v: &'v Value, e: &Expr) -> R<&'v BTreeSet<Value>> {
    v.as_set().ok_or_else(|| EvalError::Kind {
        expr: e.to_string(),
        expected: "a set",
    })
}

fn int(v: &Value, e: &Expr) -> R<i64> {
    v.as_int().ok_or_else(|| EvalError::Kind {
        expr: e.to_string(),
        expected: "an integer",
    })
}

fn pair(v: &Value, e: &Expr) -> R<(Value, Value)> {
    match v {
        Value::Pair(a, b) => Ok(((**a).clone(), (**b).clone())),
        _ => Err(EvalError::Kind {
            expr: e.to_string(),
            expected: "a relation",
        }),
    }
}

fn pairs(v: &Value, e: &Expr) -> R<Vec<(Value, Value)>> {
    set(v, e)?.iter().map(|m| pair(m, e)).collect()
}

fn not_wd(e: &Expr, reason: &'static str) -> EvalError {
    EvalError::NotWellDefined {
        expr: e.to_string(),
        reason,
    }
}

/// `a ^ b` by repeated multiplication, wrapping at every step.
pub fn wrapped_pow(a: i64, b: i64, bitwidth: u32) -> i64 {
    (0..b).fold(wrap_int(1, bitwidth), |acc, _| wrap_int(acc * a, bitwidth))
}

pub fn eval_expr(e: &Expr, env: &Env) -> R<Value> {
    let bw = env.bitwidth;
    Ok(match e {
        Expr::Ident(n) => env.lookup(n).cloned().ok_or_else(|| EvalError::Unbound(n.clone()))?,
        Expr::Int(v) => Value::Int(wrap_int(*v, bw)),
        Expr::EmptySet => Value::empty_set(),
        Expr::SetLit(items) => {
            let mut out = BTreeSet::new();
            let mut first: Option<Value> = None;
            for x in items {
                let v = eval_expr(x, env)?;
                match &first {
                    Some(f) if !compatible(f, &v) => return Err(EvalError::Heterogeneous(e.to_string())),
                    Some(_) => {}
                    None => first = Some(v.clone()),
                }
                out.insert(v);
            }
            Value::Set(out)
        }
        Expr::Maplet(a, b) => Value::pair(eval_expr(a, env)?, eval_expr(b, env)?),
        Expr::Unary(op, a) => {
            let v = eval_expr(a, env)?;
            let out: BTreeSet<Value> = match op {
                UnOp::Dom => pairs(&v, a)?.into_iter().map(|(x, _)| x).collect(),
                UnOp::Ran => pairs(&v, a)?.into_iter().map(|(_, y)| y).collect(),
                UnOp::Prj1 => pairs(&v, a)?
                    .into_iter()
                    .map(|(x, y)| Value::pair(Value::pair(x.clone(), y), x))
                    .collect(),
                UnOp::Prj2 => pairs(&v, a)?
                    .into_iter()
                    .map(|(x, y)| Value::pair(Value::pair(x, y.clone()), y))
                    .collect(),
                UnOp::Id => set(&v, a)?.iter().map(|x| Value::pair(x.clone(), x.clone())).collect(),
            };
            Value::Set(out)
        }
        Expr::Binary(op, a, b) => {
            let (x, y) = (eval_expr(a, env)?, eval_expr(b, env)?);
            match op {
                BinOp::Union => Value::Set(set(&x, a)?.union(set(&y, b)?).cloned().collect()),
                BinOp::Inter => Value::Set(set(&x, a)?.intersection(set(&y, b)?).cloned().collect()),
                BinOp::SetMinus => Value::Set(set(&x, a)?.difference(set(&y, b)?).cloned().collect()),
                BinOp::DomRes | BinOp::DomSub => {
                    let s = set(&x, a)?;
                    let keep = *op == BinOp::DomRes;
                    let mut out = BTreeSet::new();
                    for (p, q) in pairs(&y, b)? {
                        if s.contains(&p) == keep {
                            out.insert(Value::pair(p, q));
                        }
                    }
                    Value::Set(out)
                }
                BinOp::RanRes | BinOp::RanSub => {
                    let s = set(&y, b)?;
                    let keep = *op == BinOp::RanRes;
                    let mut out = BTreeSet::new();
                    for (p, q) in pairs(&x, a)? {
                        if s.contains(&q) == keep {
                            out.insert(Value::pair(p, q));
                        }
                    }
                    Value::Set(out)
                }
                _ => {
                    let (i, j) = (int(&x, a)?, int(&y, b)?);
                    Value::Int(match op {
                        BinOp::Add => wrap_int(i + j, bw),
                        BinOp::Sub => wrap_int(i - j, bw),
                        BinOp::Mul => wrap_int(i * j, bw),
                        BinOp::Div => {
                            if j == 0 {
                                return Err(not_wd(e, "division by zero"));
                            }
                            wrap_int(i / j, bw)
                        }
                        BinOp::Mod => {
                            if i < 0 || j <= 0 {
                                return Err(not_wd(e, "mod needs a non-negative dividend and a positive divisor"));
                            }
                            wrap_int(i % j, bw)
                        }
                        BinOp::Pow => {
                            if j < 0 {
                                return Err(not_wd(e, "negative exponent"));
                            }
                            wrapped_pow(i, j, bw)
                        }
                        _ => unreachable!("set operators handled above"),
                    })
                }
            }
        }
        Expr::TypeCtor(..) => {
            return Err(EvalError::Kind {
                expr: e.to_string(),
                expected: "a value, not a type",
            })
        }
    })
}

/// Conditions a function class places on a relation `pairs` between the
/// sets `dom_set` and `ran_set`.
pub fn satisfies_class(
    pairs: &[(Value, Value)],
    class: RelClass,
    dom_set: Option<&BTreeSet<Value>>,
    ran_set: Option<&BTreeSet<Value>>,
) -> bool {
    let facts = side_facts(class);
    let has = |f| facts.contains(&f);
    let distinct = |proj: &dyn Fn(&(Value, Value)) -> &Value| {
        let mut seen = BTreeSet::new();
        pairs.iter().all(|p| seen.insert(proj(p)))
    };
    if has(SideFact::Functional) && !distinct(&|p| &p.0) {
        return false;
    }
    if has(SideFact::Injective) && !distinct(&|p| &p.1) {
        return false;
    }
    if has(SideFact::Total) {
        let d: BTreeSet<&Value> = pairs.iter().map(|p| &p.0).collect();
        if dom_set.is_some_and(|s| s.iter().any(|x| !d.contains(x))) {
            return false;
        }
    }
    if has(SideFact::Surjective) {
        let r: BTreeSet<&Value> = pairs.iter().map(|p| &p.1).collect();
        if ran_set.is_some_and(|s| s.iter().any(|y| !r.contains(y))) {
            return false;
        }
    }
    true
}

/// `v : target`, where `target` may be built from type constructors.
pub fn member_of(v: &Value, target: &Expr, env: &mut Env) -> R<bool> {
    match target {
        Expr::TypeCtor(class, a, b) => {
            let Some(members) = v.as_set() else { return Ok(false) };
            let mut ps = Vec::with_capacity(members.len());
            for m in members {
                let Value::Pair(x, y) = m else { return Ok(false) };
                if !member_of(x, a, env)? || !member_of(y, b, env)? {
                    return Ok(false);
                }
                ps.push(((**x).clone(), (**y).clone()));
            }
            let facts = side_facts(*class);
            let dom_set = if facts.contains(&SideFact::Total) {
                Some(eval_expr(a, env)?)
            } else {
                None
            };
            let ran_set = if facts.contains(&SideFact::Surjective) {
                Some(eval_expr(b, env)?)
            } else {
                None
            };
            Ok(satisfies_class(
                &ps,
                *class,
                dom_set.as_ref().map(|s| set(s, a)).transpose()?,
                ran_set.as_ref().map(|s| set(s, b)).transpose()?,
            ))
        }
        other => {
            let s = eval_expr(other, env)?;
            Ok(set(&s, other)?.contains(v))
        }
    }
}

/// Whether `v` inhabits the declared type `t`, given the values of every
/// carrier and enumerated set.
pub fn inhabits(v: &Value, t: &TypeTerm, sets: &BTreeMap<String, Value>) -> bool {
    match t {
        TypeTerm::Given(s) => sets.get(s).and_then(Value::as_set).is_some_and(|m| m.contains(v)),
        TypeTerm::Integer => matches!(v, Value::Int(_)),
        TypeTerm::Rel(a, b, class) => {
            let Some(members) = v.as_set() else { return false };
            let mut ps = Vec::with_capacity(members.len());
            for m in members {
                let Value::Pair(x, y) = m else { return false };
                if !inhabits(x, a, sets) || !inhabits(y, b, sets) {
                    return false;
                }
                ps.push(((**x).clone(), (**y).clone()));
            }
            let scalar_set = |t: &TypeTerm| match t {
                TypeTerm::Given(s) => sets.get(s).and_then(Value::as_set).cloned(),
                _ => None,
            };
            satisfies_class(&ps, *class, scalar_set(a).as_ref(), scalar_set(b).as_ref())
        }
    }
}

pub fn eval_pred(p: &Pred, env: &mut Env) -> R<bool> {
    Ok(match p {
        Pred::Cmp(op, a, b) => match op {
            CmpOp::In => member_of(&eval_expr(a, env)?, b, env)?,
            CmpOp::NotIn => !member_of(&eval_expr(a, env)?, b, env)?,
            CmpOp::Eq => eval_expr(a, env)? == eval_expr(b, env)?,
            CmpOp::Neq => eval_expr(a, env)? != eval_expr(b, env)?,
            CmpOp::Subset => {
                let (x, y) = (eval_expr(a, env)?, eval_expr(b, env)?);
                set(&x, a)?.is_subset(set(&y, b)?)
            }
            CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                let (x, y) = (int(&eval_expr(a, env)?, a)?, int(&eval_expr(b, env)?, b)?);
                match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    _ => x >= y,
                }
            }
        },
        Pred::And(a, b) => eval_pred(a, env)? && eval_pred(b, env)?,
        Pred::Or(a, b) => eval_pred(a, env)? || eval_pred(b, env)?,
        Pred::Implies(a, b) => !eval_pred(a, env)? || eval_pred(b, env)?,
        Pred::Not(a) => !eval_pred(a, env)?,
        Pred::Forall(vars, body) | Pred::Exists(vars, body) => {
            let universal = matches!(p, Pred::Forall(..));
            let domains = quantifier_domains(vars, body, universal).map_err(|v| EvalError::NoDomain(v.to_string()))?;
            let depth = env.depth();
            let r = quantify(vars, &domains, body, universal, env);
            env.truncate(depth);
            r?
        }
    })
}

/// Enumerates bindings in order; the body is evaluated whole, so the domain
/// conjuncts hold trivially.
fn quantify(vars: &[String], domains: &[&Expr], body: &Pred, universal: bool, env: &mut Env) -> R<bool> {
    let Some((v, rest)) = vars.split_first() else {
        return eval_pred(body, env);
    };
    let dom = eval_expr(domains[0], env)?;
    for x in set(&dom, domains[0])?.clone() {
        env.push(v, x);
        let r = quantify(rest, &domains[1..], body, universal, env);
        env.truncate(env.depth() - 1);
        if r? != universal {
            return Ok(!universal);
        }
    }
    Ok(universal)
}
