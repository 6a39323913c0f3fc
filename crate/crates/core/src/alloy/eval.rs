//! Relational evaluator for the target-language subset, over a finite
//! instance. Used as the oracle side of differential tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::prelude::prelude;
use crate::value::{int_range, wrap_int, Atom, Relation};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlloyEvalError {
    #[error("unbound name '{0}'")]
    Unbound(String),
    #[error("arity mismatch in '{op}': {left} vs {right}")]
    Arity { op: String, left: usize, right: usize },
    #[error("expected {expected} in '{expr}'")]
    Kind { expected: &'static str, expr: String },
    #[error("'{0}' is not an integer expression")]
    NotInteger(String),
    #[error("'{name}' expects {expected} arguments, got {got}")]
    ArgumentCount { name: String, expected: usize, got: usize },
}

type R<T> = Result<T, AlloyEvalError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlloyValue {
    Rel(Relation),
    Bool(bool),
}

/// A finite instance: a relation for every signature and field, plus the
/// integer bitwidth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub relations: BTreeMap<String, Relation>,
    pub bitwidth: u32,
}

impl Instance {
    pub fn new(bitwidth: u32) -> Self {
        Instance {
            relations: BTreeMap::new(),
            bitwidth,
        }
    }

    pub fn bind(&mut self, name: &str, rel: Relation) {
        self.relations.insert(name.to_string(), rel);
    }

    /// Every atom mentioned by the instance, plus the integers.
    pub fn universe(&self) -> BTreeSet<Atom> {
        let mut u: BTreeSet<Atom> = self
            .relations
            .values()
            .flat_map(|r| r.atoms().cloned().collect::<Vec<_>>())
            .collect();
        u.extend(int_range(self.bitwidth).map(Atom::Int));
        u
    }
}

fn rel(arity: usize, tuples: BTreeSet<Vec<Atom>>) -> Relation {
    Relation::from_tuples(arity, tuples).expect("tuples built with a uniform arity")
}

fn int_rel(v: i64) -> Relation {
    Relation::singleton(Atom::Int(v))
}

/// Arity of the result of a binary set operation; an empty operand adopts
/// the other's arity.
fn same_arity(op: &str, a: &Relation, b: &Relation) -> R<usize> {
    if a.arity() == b.arity() || b.is_empty() {
        Ok(a.arity())
    } else if a.is_empty() {
        Ok(b.arity())
    } else {
        Err(AlloyEvalError::Arity {
            op: op.to_string(),
            left: a.arity(),
            right: b.arity(),
        })
    }
}

pub fn union(a: &Relation, b: &Relation) -> R<Relation> {
    let n = same_arity("+", a, b)?;
    Ok(rel(n, a.tuples().union(b.tuples()).cloned().collect()))
}

pub fn difference(a: &Relation, b: &Relation) -> R<Relation> {
    let n = same_arity("-", a, b)?;
    Ok(rel(n, a.tuples().difference(b.tuples()).cloned().collect()))
}

pub fn intersection(a: &Relation, b: &Relation) -> R<Relation> {
    let n = same_arity("&", a, b)?;
    Ok(rel(n, a.tuples().intersection(b.tuples()).cloned().collect()))
}

pub fn join(a: &Relation, b: &Relation) -> R<Relation> {
    if a.arity() + b.arity() < 3 {
        return Err(AlloyEvalError::Arity {
            op: ".".into(),
            left: a.arity(),
            right: b.arity(),
        });
    }
    let mut index: HashMap<&Atom, Vec<&Vec<Atom>>> = HashMap::new();
    for t in b.tuples() {
        index.entry(&t[0]).or_default().push(t);
    }
    let mut out = BTreeSet::new();
    for t in a.tuples() {
        if let Some(matches) = index.get(t.last().expect("non-empty tuple")) {
            for u in matches {
                let mut v = t[..t.len() - 1].to_vec();
                v.extend_from_slice(&u[1..]);
                out.insert(v);
            }
        }
    }
    Ok(rel(a.arity() + b.arity() - 2, out))
}

pub fn product(a: &Relation, b: &Relation) -> Relation {
    let mut out = BTreeSet::new();
    for t in a.tuples() {
        for u in b.tuples() {
            let mut v = t.clone();
            v.extend_from_slice(u);
            out.insert(v);
        }
    }
    rel(a.arity() + b.arity(), out)
}

pub fn domain_restrict(s: &Relation, r: &Relation) -> R<Relation> {
    if s.arity() != 1 && !s.is_empty() {
        return Err(AlloyEvalError::Arity {
            op: "<:".into(),
            left: s.arity(),
            right: r.arity(),
        });
    }
    let keep = r.tuples().iter().filter(|t| s.contains(&t[..1])).cloned().collect();
    Ok(rel(r.arity(), keep))
}

pub fn range_restrict(r: &Relation, s: &Relation) -> R<Relation> {
    if s.arity() != 1 && !s.is_empty() {
        return Err(AlloyEvalError::Arity {
            op: ":>".into(),
            left: r.arity(),
            right: s.arity(),
        });
    }
    let keep = r
        .tuples()
        .iter()
        .filter(|t| s.contains(&t[t.len() - 1..]))
        .cloned()
        .collect();
    Ok(rel(r.arity(), keep))
}

pub fn transpose(r: &Relation) -> Relation {
    let out = r.tuples().iter().map(|t| t.iter().rev().cloned().collect()).collect();
    rel(r.arity(), out)
}

/// `left m -> n right` membership test for a binary relation `r`.
fn within_arrow(r: &Relation, left: &Relation, lm: Option<Mult>, rm: Option<Mult>, right: &Relation) -> bool {
    if r.arity() != left.arity() + right.arity() && !r.is_empty() {
        return false;
    }
    let k = left.arity();
    let in_product = r
        .tuples()
        .iter()
        .all(|t| left.contains(&t[..k]) && right.contains(&t[k..]));
    let ok = |m: Option<Mult>, n: usize| match m {
        None | Some(Mult::Set) => true,
        Some(Mult::Lone) => n <= 1,
        Some(Mult::One) => n == 1,
        Some(Mult::Some) => n >= 1,
    };
    let right_ok = left
        .tuples()
        .iter()
        .all(|a| ok(rm, r.tuples().iter().filter(|t| t[..k] == a[..]).count()));
    let left_ok = right
        .tuples()
        .iter()
        .all(|b| ok(lm, r.tuples().iter().filter(|t| t[k..] == b[..]).count()));
    in_product && right_ok && left_ok
}

pub struct Evaluator<'a> {
    inst: &'a Instance,
    funs: HashMap<String, FunDecl>,
    preds: HashMap<String, PredDecl>,
    univ: Relation,
    locals: Vec<(String, AlloyValue)>,
}

impl<'a> Evaluator<'a> {
    /// Functions and predicates come from `module` when given; the prelude
    /// functions are always available.
    pub fn new(inst: &'a Instance, module: Option<&AlloyModule>) -> Self {
        let mut funs: HashMap<String, FunDecl> = prelude().into_iter().map(|f| (f.name.clone(), f)).collect();
        let mut preds = HashMap::new();
        if let Some(m) = module {
            for f in m.funs() {
                funs.insert(f.name.clone(), f.clone());
            }
            for p in m.preds() {
                preds.insert(p.name.clone(), p.clone());
            }
        }
        let univ = Relation::unary(inst.universe());
        Evaluator {
            inst,
            funs,
            preds,
            univ,
            locals: Vec::new(),
        }
    }

    pub fn bitwidth(&self) -> u32 {
        self.inst.bitwidth
    }

    pub fn eval(&mut self, e: &AlloyExpr) -> R<AlloyValue> {
        use AlloyExpr as E;
        Ok(match e {
            E::Name(n) => self.lookup(n)?,
            E::Int(v) => AlloyValue::Rel(int_rel(wrap_int(*v, self.inst.bitwidth))),
            E::None => AlloyValue::Rel(Relation::empty(1)),
            E::Univ => AlloyValue::Rel(self.univ.clone()),
            E::Iden => {
                let t = self
                    .univ
                    .tuples()
                    .iter()
                    .map(|a| vec![a[0].clone(), a[0].clone()])
                    .collect();
                AlloyValue::Rel(rel(2, t))
            }
            E::Unary(UnaryOp::Not, a) => AlloyValue::Bool(!self.formula(a)?),
            E::Unary(UnaryOp::Transpose, a) => AlloyValue::Rel(transpose(&self.relation(a)?)),
            E::Unary(UnaryOp::Mult(q), a) => {
                let n = self.relation(a)?.len();
                AlloyValue::Bool(match q {
                    Quant::No => n == 0,
                    Quant::Some => n > 0,
                    Quant::One => n == 1,
                    Quant::Lone => n <= 1,
                    Quant::All => {
                        return Err(AlloyEvalError::Kind {
                            expected: "a multiplicity keyword",
                            expr: e.to_string(),
                        })
                    }
                })
            }
            E::Binary(op, a, b) => self.binary(*op, a, b, e)?,
            E::Product { left, right, .. } => AlloyValue::Rel(product(&self.relation(left)?, &self.relation(right)?)),
            E::IfElse(c, t, f) => {
                if self.formula(c)? {
                    self.eval(t)?
                } else {
                    self.eval(f)?
                }
            }
            E::Call(name, args) => self.call(name, args)?,
            E::Quant(q, decls, body) => {
                let mut count = 0usize;
                let mut all = true;
                self.each_binding(decls, &mut |ev| {
                    if ev.formula(body)? {
                        count += 1;
                    } else {
                        all = false;
                    }
                    Ok(())
                })?;
                AlloyValue::Bool(match q {
                    Quant::All => all,
                    Quant::Some => count > 0,
                    Quant::No => count == 0,
                    Quant::One => count == 1,
                    Quant::Lone => count <= 1,
                })
            }
            E::Let(binds, body) => {
                let depth = self.locals.len();
                for (n, v) in binds {
                    let v = self.eval(v)?;
                    self.locals.push((n.clone(), v));
                }
                let r = self.eval(body);
                self.locals.truncate(depth);
                r?
            }
            E::Comprehension(decls, body) => {
                let arity = decls.iter().map(|d| d.names.len()).sum();
                let mut out = BTreeSet::new();
                self.each_binding(decls, &mut |ev| {
                    if ev.formula(body)? {
                        let t = ev.locals[ev.locals.len() - arity..]
                            .iter()
                            .map(|(_, v)| match v {
                                AlloyValue::Rel(r) => r.tuples().iter().next().expect("singleton")[0].clone(),
                                AlloyValue::Bool(_) => unreachable!("bound variables are atoms"),
                            })
                            .collect();
                        out.insert(t);
                    }
                    Ok(())
                })?;
                AlloyValue::Rel(rel(arity, out))
            }
            E::Block(items) => {
                let formulas: Vec<&AlloyExpr> = AlloyExpr::block_formulas(items).collect();
                if let [single] = formulas[..] {
                    return self.eval(single);
                }
                for f in formulas {
                    if !self.formula(f)? {
                        return Ok(AlloyValue::Bool(false));
                    }
                }
                AlloyValue::Bool(true)
            }
        })
    }

    pub fn relation(&mut self, e: &AlloyExpr) -> R<Relation> {
        match self.eval(e)? {
            AlloyValue::Rel(r) => Ok(r),
            AlloyValue::Bool(_) => Err(AlloyEvalError::Kind {
                expected: "a relational expression",
                expr: e.to_string(),
            }),
        }
    }

    pub fn formula(&mut self, e: &AlloyExpr) -> R<bool> {
        match self.eval(e)? {
            AlloyValue::Bool(b) => Ok(b),
            AlloyValue::Rel(_) => Err(AlloyEvalError::Kind {
                expected: "a formula",
                expr: e.to_string(),
            }),
        }
    }

    /// Integer value: the sum of the integer atoms, as the analyzer casts.
    pub fn integer(&mut self, e: &AlloyExpr) -> R<i64> {
        let r = self.relation(e)?;
        if r.arity() != 1 && !r.is_empty() {
            return Err(AlloyEvalError::NotInteger(e.to_string()));
        }
        let mut sum = 0i64;
        for a in r.atoms() {
            match a {
                Atom::Int(v) => sum = wrap_int(sum + v, self.inst.bitwidth),
                Atom::Elem(_) => return Err(AlloyEvalError::NotInteger(e.to_string())),
            }
        }
        Ok(sum)
    }

    /// Applies predicate `name` to the given argument relations.
    pub fn call_pred(&mut self, name: &str, args: Vec<Relation>) -> R<bool> {
        let p = self
            .preds
            .get(name)
            .cloned()
            .ok_or_else(|| AlloyEvalError::Unbound(name.to_string()))?;
        self.apply(
            name,
            &p.params,
            args.into_iter().map(AlloyValue::Rel).collect(),
            &p.body,
        )
        .and_then(|v| match v {
            AlloyValue::Bool(b) => Ok(b),
            AlloyValue::Rel(_) => Err(AlloyEvalError::Kind {
                expected: "a formula",
                expr: name.to_string(),
            }),
        })
    }

    fn lookup(&self, n: &str) -> R<AlloyValue> {
        if let Some((_, v)) = self.locals.iter().rev().find(|(m, _)| m == n) {
            return Ok(v.clone());
        }
        if let Some(r) = self.inst.relations.get(n) {
            return Ok(AlloyValue::Rel(r.clone()));
        }
        if n == "Int" {
            return Ok(AlloyValue::Rel(Relation::unary(
                int_range(self.inst.bitwidth).map(Atom::Int),
            )));
        }
        Err(AlloyEvalError::Unbound(n.to_string()))
    }

    fn binary(&mut self, op: BinaryOp, a: &AlloyExpr, b: &AlloyExpr, whole: &AlloyExpr) -> R<AlloyValue> {
        use BinaryOp::*;
        let v = match op {
            And => AlloyValue::Bool(self.formula(a)? && self.formula(b)?),
            Or => AlloyValue::Bool(self.formula(a)? || self.formula(b)?),
            Implies => AlloyValue::Bool(!self.formula(a)? || self.formula(b)?),
            Iff => AlloyValue::Bool(self.formula(a)? == self.formula(b)?),
            Lt | Le | Gt | Ge => {
                let (x, y) = (self.integer(a)?, self.integer(b)?);
                AlloyValue::Bool(match op {
                    Lt => x < y,
                    Le => x <= y,
                    Gt => x > y,
                    _ => x >= y,
                })
            }
            In => {
                if let AlloyExpr::Product {
                    left,
                    left_mult,
                    right_mult,
                    right,
                } = b
                {
                    if left_mult.is_some() || right_mult.is_some() {
                        let r = self.relation(a)?;
                        let l = self.relation(left)?;
                        let rr = self.relation(right)?;
                        return Ok(AlloyValue::Bool(within_arrow(&r, &l, *left_mult, *right_mult, &rr)));
                    }
                }
                let (x, y) = (self.relation(a)?, self.relation(b)?);
                same_arity("in", &x, &y)?;
                AlloyValue::Bool(x.tuples().is_subset(y.tuples()))
            }
            Eq => {
                let (x, y) = (self.relation(a)?, self.relation(b)?);
                same_arity("=", &x, &y)?;
                AlloyValue::Bool(x.same_tuples(&y))
            }
            _ => {
                let (x, y) = (self.relation(a)?, self.relation(b)?);
                AlloyValue::Rel(match op {
                    Union => union(&x, &y)?,
                    Diff => difference(&x, &y)?,
                    Inter => intersection(&x, &y)?,
                    Join => join(&x, &y)?,
                    DomRes => domain_restrict(&x, &y)?,
                    RanRes => range_restrict(&x, &y)?,
                    _ => unreachable!("{} handled above in {whole}", op.token()),
                })
            }
        };
        Ok(v)
    }

    fn call(&mut self, name: &str, args: &[AlloyExpr]) -> R<AlloyValue> {
        let bw = self.inst.bitwidth;
        let arith = |f: fn(i64, i64) -> i64| move |x: i64, y: i64| wrap_int(f(x, y), bw);
        let int_op: Option<Box<dyn Fn(i64, i64) -> i64>> = match name {
            "plus" => Some(Box::new(arith(|x, y| x + y))),
            "minus" => Some(Box::new(arith(|x, y| x - y))),
            "mul" => Some(Box::new(arith(|x, y| x * y))),
            // Division by zero has no defined result in the source
            // language; callers never rely on the value chosen here.
            "div" => Some(Box::new(arith(|x, y| if y == 0 { 0 } else { x / y }))),
            "rem" => Some(Box::new(arith(|x, y| if y == 0 { x } else { x % y }))),
            _ => None,
        };
        if let Some(f) = int_op {
            if args.len() != 2 {
                return Err(AlloyEvalError::ArgumentCount {
                    name: name.into(),
                    expected: 2,
                    got: args.len(),
                });
            }
            let (x, y) = (self.integer(&args[0])?, self.integer(&args[1])?);
            return Ok(AlloyValue::Rel(int_rel(f(x, y))));
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a)?);
        }
        if let Some(f) = self.funs.get(name).cloned() {
            return self.apply(name, &f.params, vals, &f.body);
        }
        if let Some(p) = self.preds.get(name).cloned() {
            return self.apply(name, &p.params, vals, &p.body);
        }
        // Box join: f[a, b] = b.(a.f).
        let mut r = match self.lookup(name)? {
            AlloyValue::Rel(r) => r,
            AlloyValue::Bool(_) => return Err(AlloyEvalError::Unbound(name.into())),
        };
        for v in vals {
            match v {
                AlloyValue::Rel(a) => r = join(&a, &r)?,
                AlloyValue::Bool(_) => {
                    return Err(AlloyEvalError::Kind {
                        expected: "a relational argument",
                        expr: name.into(),
                    })
                }
            }
        }
        Ok(AlloyValue::Rel(r))
    }

    fn apply(&mut self, name: &str, params: &[Decl], args: Vec<AlloyValue>, body: &AlloyExpr) -> R<AlloyValue> {
        let names: Vec<&String> = params.iter().flat_map(|d| d.names.iter()).collect();
        if names.len() != args.len() {
            return Err(AlloyEvalError::ArgumentCount {
                name: name.into(),
                expected: names.len(),
                got: args.len(),
            });
        }
        // Bodies see only their parameters.
        let saved = std::mem::take(&mut self.locals);
        self.locals = names.into_iter().cloned().zip(args).collect();
        let r = self.eval(body);
        self.locals = saved;
        r
    }

    /// Runs `f` once per binding of the declared variables to atoms of
    /// their (unary) bounds, in tuple order.
    fn each_binding(&mut self, decls: &[Decl], f: &mut dyn FnMut(&mut Self) -> R<()>) -> R<()> {
        let vars: Vec<(String, &AlloyExpr)> = decls
            .iter()
            .flat_map(|d| d.names.iter().map(move |n| (n.clone(), &d.bound)))
            .collect();
        let depth = self.locals.len();
        let r = self.bind_from(&vars, 0, f);
        self.locals.truncate(depth);
        r
    }

    fn bind_from(&mut self, vars: &[(String, &AlloyExpr)], i: usize, f: &mut dyn FnMut(&mut Self) -> R<()>) -> R<()> {
        if i == vars.len() {
            return f(self);
        }
        let bound = self.relation(vars[i].1)?;
        if bound.arity() != 1 && !bound.is_empty() {
            return Err(AlloyEvalError::Kind {
                expected: "a unary bound",
                expr: vars[i].1.to_string(),
            });
        }
        for t in bound.tuples() {
            self.locals
                .push((vars[i].0.clone(), AlloyValue::Rel(Relation::singleton(t[0].clone()))));
            let r = self.bind_from(vars, i + 1, f);
            self.locals.pop();
            r?;
        }
        Ok(())
    }
}

/// Evaluates a relational expression over `inst`, with the prelude
/// functions available.
pub fn eval_alloy_expr(e: &AlloyExpr, inst: &Instance) -> Result<Relation, AlloyEvalError> {
    Evaluator::new(inst, None).relation(e)
}
