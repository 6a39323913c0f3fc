//! Random well-typed expressions and environments for differential testing
//! of the encoder against the reference evaluator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use eventb_alloy::alloy::{prelude, AlloyModule, Evaluator, Instance, Paragraph};
use eventb_alloy::checker::{carrier_values, eval_expr, eval_pred, int_values, Env, EvalError};
use eventb_alloy::encoder::EncodeContext;
use eventb_alloy::frontend::{BinOp, CmpOp, Expr, Pred, UnOp};
use eventb_alloy::typing::{Ty, TypeScope};
use eventb_alloy::value::{Elem, Relation, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub const BITWIDTH: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum G {
    A,
    B,
    Int,
    SetA,
    SetB,
    SetInt,
    RelAB,
    RelAA,
    RelAI,
}

fn ty(g: G) -> Ty {
    let a = || Ty::Given("A".into());
    let b = || Ty::Given("B".into());
    match g {
        G::A => a(),
        G::B => b(),
        G::Int => Ty::Int,
        G::SetA => Ty::set(a()),
        G::SetB => Ty::set(b()),
        G::SetInt => Ty::set(Ty::Int),
        G::RelAB => Ty::set(Ty::pair(a(), b())),
        G::RelAA => Ty::set(Ty::pair(a(), a())),
        G::RelAI => Ty::set(Ty::pair(a(), Ty::Int)),
    }
}

/// Variables of the generated environments, with their sorts.
pub const VARS: &[(&str, G)] = &[
    ("a1", G::A),
    ("a2", G::A),
    ("b1", G::B),
    ("b2", G::B),
    ("i1", G::Int),
    ("i2", G::Int),
    ("sa", G::SetA),
    ("sb", G::SetB),
    ("si", G::SetInt),
    ("r", G::RelAB),
    ("q", G::RelAB),
    ("t", G::RelAA),
    ("w", G::RelAI),
];

fn id(n: &str) -> Expr {
    Expr::ident(n)
}

fn vars_of(g: G) -> Vec<&'static str> {
    VARS.iter().filter(|(_, s)| *s == g).map(|(n, _)| *n).collect()
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty")
}

fn elem_sort(g: G) -> G {
    match g {
        G::SetA => G::A,
        G::SetB => G::B,
        G::SetInt => G::Int,
        _ => unreachable!(),
    }
}

fn rel_sorts(g: G) -> (G, G) {
    match g {
        G::RelAB => (G::A, G::B),
        G::RelAA => (G::A, G::A),
        G::RelAI => (G::A, G::Int),
        _ => unreachable!(),
    }
}

fn set_of(g: G) -> G {
    match g {
        G::A => G::SetA,
        G::B => G::SetB,
        G::Int => G::SetInt,
        _ => unreachable!(),
    }
}

/// A random expression of sort `g` with operator nesting at most `depth`.
pub fn gen_expr<R: Rng>(rng: &mut R, g: G, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    match g {
        G::A | G::B => id(pick(rng, &vars_of(g))),
        G::Int => {
            if leaf {
                if rng.gen_bool(0.5) {
                    id(pick(rng, &vars_of(g)))
                } else {
                    Expr::Int(rng.gen_range(0..=7))
                }
            } else {
                let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod, BinOp::Pow]
                    .choose(rng)
                    .unwrap();
                Expr::binary(op, gen_expr(rng, G::Int, depth - 1), gen_expr(rng, G::Int, depth - 1))
            }
        }
        G::SetA | G::SetB | G::SetInt => {
            let el = elem_sort(g);
            if leaf {
                return match rng.gen_range(0..4) {
                    0 => Expr::EmptySet,
                    1 => match g {
                        G::SetA => id("A"),
                        G::SetB => id("B"),
                        _ => id("INT"),
                    },
                    2 => id(pick(rng, &vars_of(g))),
                    _ => {
                        let n = rng.gen_range(1..=3);
                        Expr::SetLit((0..n).map(|_| gen_expr(rng, el, 0)).collect())
                    }
                };
            }
            let d = depth - 1;
            match rng.gen_range(0..5) {
                0 | 1 => {
                    let op = *[BinOp::Union, BinOp::Inter, BinOp::SetMinus].choose(rng).unwrap();
                    Expr::binary(op, gen_expr(rng, g, d), gen_expr(rng, g, d))
                }
                2 => {
                    let n = rng.gen_range(1..=3);
                    Expr::SetLit((0..n).map(|_| gen_expr(rng, el, d)).collect())
                }
                _ => match g {
                    G::SetA => {
                        let r = *[G::RelAB, G::RelAA, G::RelAI].choose(rng).unwrap();
                        if r == G::RelAA && rng.gen_bool(0.5) {
                            Expr::unary(UnOp::Ran, gen_expr(rng, r, d))
                        } else {
                            Expr::unary(UnOp::Dom, gen_expr(rng, r, d))
                        }
                    }
                    G::SetB => {
                        if rng.gen_bool(0.5) {
                            Expr::unary(UnOp::Ran, gen_expr(rng, G::RelAB, d))
                        } else {
                            // ran(prj2(r)) is the range of r.
                            Expr::unary(UnOp::Ran, Expr::unary(UnOp::Prj2, gen_expr(rng, G::RelAB, d)))
                        }
                    }
                    _ => Expr::unary(UnOp::Ran, gen_expr(rng, G::RelAI, d)),
                },
            }
        }
        G::RelAB | G::RelAA | G::RelAI => {
            let (x, y) = rel_sorts(g);
            if leaf {
                return match rng.gen_range(0..3) {
                    0 => Expr::EmptySet,
                    1 => id(pick(rng, &vars_of(g))),
                    _ => {
                        let n = rng.gen_range(1..=3);
                        Expr::SetLit(
                            (0..n)
                                .map(|_| Expr::maplet(gen_expr(rng, x, 0), gen_expr(rng, y, 0)))
                                .collect(),
                        )
                    }
                };
            }
            let d = depth - 1;
            match rng.gen_range(0..7) {
                0 | 1 => {
                    let op = *[BinOp::Union, BinOp::Inter, BinOp::SetMinus].choose(rng).unwrap();
                    Expr::binary(op, gen_expr(rng, g, d), gen_expr(rng, g, d))
                }
                2 => {
                    let op = *[BinOp::DomRes, BinOp::DomSub].choose(rng).unwrap();
                    Expr::binary(op, gen_expr(rng, set_of(x), d), gen_expr(rng, g, d))
                }
                3 => {
                    let op = *[BinOp::RanRes, BinOp::RanSub].choose(rng).unwrap();
                    Expr::binary(op, gen_expr(rng, g, d), gen_expr(rng, set_of(y), d))
                }
                4 if g == G::RelAA => Expr::unary(UnOp::Id, gen_expr(rng, G::SetA, d)),
                4 | 5 => Expr::unary(UnOp::Dom, Expr::unary(UnOp::Prj1, gen_expr(rng, g, d))),
                _ => {
                    let n = rng.gen_range(1..=2);
                    Expr::SetLit(
                        (0..n)
                            .map(|_| Expr::maplet(gen_expr(rng, x, d), gen_expr(rng, y, d)))
                            .collect(),
                    )
                }
            }
        }
    }
}

/// A random predicate over the generated variables.
pub fn gen_pred<R: Rng>(rng: &mut R, depth: u32) -> Pred {
    let sorts = [G::A, G::B, G::Int];
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..4) {
            0 => {
                let s = *sorts.choose(rng).unwrap();
                let op = *[CmpOp::In, CmpOp::NotIn].choose(rng).unwrap();
                Pred::cmp(op, gen_expr(rng, s, 1), gen_expr(rng, set_of(s), 1))
            }
            1 => {
                let s = *[G::SetA, G::RelAB, G::SetInt].choose(rng).unwrap();
                let op = *[CmpOp::Eq, CmpOp::Neq, CmpOp::Subset].choose(rng).unwrap();
                Pred::cmp(op, gen_expr(rng, s, 1), gen_expr(rng, s, 1))
            }
            2 => {
                let op = *[CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq]
                    .choose(rng)
                    .unwrap();
                Pred::cmp(op, gen_expr(rng, G::Int, 1), gen_expr(rng, G::Int, 1))
            }
            _ => {
                let op = *[CmpOp::Eq, CmpOp::Neq].choose(rng).unwrap();
                Pred::cmp(op, gen_expr(rng, G::A, 0), gen_expr(rng, G::A, 0))
            }
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Pred::and(gen_pred(rng, d), gen_pred(rng, d)),
        1 => Pred::or(gen_pred(rng, d), gen_pred(rng, d)),
        2 => Pred::implies(gen_pred(rng, d), gen_pred(rng, d)),
        3 => Pred::negate(gen_pred(rng, d)),
        // The bound variable shadows nothing: `x` is not a generated name.
        4 => Pred::Forall(
            vec!["x".into()],
            Box::new(Pred::implies(
                Pred::cmp(CmpOp::In, id("x"), gen_expr(rng, G::SetA, 1)),
                Pred::cmp(CmpOp::In, id("x"), gen_expr(rng, G::SetA, 1)),
            )),
        ),
        _ => Pred::Exists(
            vec!["x".into()],
            Box::new(Pred::and(
                Pred::cmp(CmpOp::In, id("x"), gen_expr(rng, G::SetA, 1)),
                Pred::cmp(
                    CmpOp::In,
                    Expr::maplet(id("x"), gen_expr(rng, G::B, 0)),
                    gen_expr(rng, G::RelAB, 1),
                ),
            )),
        ),
    }
}

/// Concrete values for every variable, over `na` atoms of `A` and `nb` of
/// `B`.
pub struct World {
    pub na: u32,
    pub nb: u32,
    pub values: BTreeMap<&'static str, Value>,
}

fn atom(set: &str, i: u32) -> Value {
    Value::Elem(Elem::indexed(set, i))
}

fn subset<R: Rng>(rng: &mut R, all: Vec<Value>, max: usize) -> Value {
    let mut picked: Vec<Value> = all.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    picked.shuffle(rng);
    picked.truncate(max);
    Value::Set(picked.into_iter().collect())
}

pub fn gen_world<R: Rng>(rng: &mut R) -> World {
    let na = rng.gen_range(1..=4);
    let nb = rng.gen_range(1..=4);
    let ints: Vec<i64> = eventb_alloy::value::int_range(BITWIDTH).collect();
    let a_all: Vec<Value> = (0..na).map(|i| atom("A", i)).collect();
    let b_all: Vec<Value> = (0..nb).map(|i| atom("B", i)).collect();
    let i_all: Vec<Value> = ints.iter().map(|i| Value::Int(*i)).collect();
    let prod = |xs: &[Value], ys: &[Value]| -> Vec<Value> {
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone())))
            .collect()
    };
    let mut values = BTreeMap::new();
    for (n, g) in VARS {
        let v = match g {
            G::A => a_all.choose(rng).unwrap().clone(),
            G::B => b_all.choose(rng).unwrap().clone(),
            G::Int => i_all.choose(rng).unwrap().clone(),
            G::SetA => subset(rng, a_all.clone(), 4),
            G::SetB => subset(rng, b_all.clone(), 4),
            G::SetInt => subset(rng, i_all.clone(), 4),
            G::RelAB => subset(rng, prod(&a_all, &b_all), 16),
            G::RelAA => subset(rng, prod(&a_all, &a_all), 16),
            G::RelAI => subset(rng, prod(&a_all, &i_all), 6),
        };
        values.insert(*n, v);
    }
    World { na, nb, values }
}

impl World {
    pub fn env(&self) -> Env {
        let mut env = Env::new(BITWIDTH);
        env.bind("A", carrier_values("A", self.na));
        env.bind("B", carrier_values("B", self.nb));
        env.bind("INT", int_values(BITWIDTH));
        for (n, v) in &self.values {
            env.bind(n, v.clone());
        }
        env
    }

    pub fn instance(&self) -> Instance {
        let mut inst = Instance::new(BITWIDTH);
        let rel = |v: &Value, arity: usize| {
            v.to_relation()
                .filter(|r| !r.is_empty())
                .unwrap_or(Relation::empty(arity))
        };
        inst.bind("A", rel(&carrier_values("A", self.na), 1));
        inst.bind("B", rel(&carrier_values("B", self.nb), 1));
        for (n, g) in VARS {
            inst.bind(n, rel(&self.values[n], ty(*g).arity()));
        }
        inst
    }
}

pub fn encode_context() -> EncodeContext {
    let mut globals = BTreeMap::new();
    globals.insert("A".to_string(), Ty::set(Ty::Given("A".into())));
    globals.insert("B".to_string(), Ty::set(Ty::Given("B".into())));
    globals.insert("INT".to_string(), Ty::set(Ty::Int));
    for (n, g) in VARS {
        globals.insert(n.to_string(), ty(*g));
    }
    let mut ctx = EncodeContext::new(TypeScope::from_globals(globals), BITWIDTH);
    ctx.set_path("INT", eventb_alloy::alloy::AlloyExpr::name("Int"));
    ctx
}

pub fn prelude_module() -> AlloyModule {
    let mut m = AlloyModule::new("differential");
    m.paragraphs.extend(prelude().into_iter().map(Paragraph::Fun));
    m
}

#[derive(Debug)]
pub enum Outcome {
    Agree,
    /// The expression is not well defined in this environment.
    Undefined,
    Disagree(String),
}

/// Compares the reference value of `e` with the value of its encoding.
pub fn compare_expr(e: &Expr, world: &World, module: &AlloyModule) -> Outcome {
    let expected = match eval_expr(e, &world.env()) {
        Ok(v) => v,
        Err(EvalError::NotWellDefined { .. }) => return Outcome::Undefined,
        Err(err) => return Outcome::Disagree(format!("{e}: reference evaluator failed: {err}")),
    };
    let encoded = match encode_context().encode_expr(e) {
        Ok(a) => a,
        Err(err) => return Outcome::Disagree(format!("{e}: encoding failed: {err}")),
    };
    let inst = world.instance();
    let got = match Evaluator::new(&inst, Some(module)).relation(&encoded) {
        Ok(r) => r,
        Err(err) => return Outcome::Disagree(format!("{e}: relational evaluation failed: {err}")),
    };
    let want = expected.to_relation().expect("flat value");
    if want.same_tuples(&got) {
        Outcome::Agree
    } else {
        Outcome::Disagree(format!("{e}: expected {want}, got {got}"))
    }
}

pub fn compare_pred(p: &Pred, world: &World, module: &AlloyModule) -> Outcome {
    let expected = match eval_pred(p, &mut world.env()) {
        Ok(v) => v,
        Err(EvalError::NotWellDefined { .. }) => return Outcome::Undefined,
        Err(err) => return Outcome::Disagree(format!("{p}: reference evaluator failed: {err}")),
    };
    let encoded = match encode_context().encode_pred(p) {
        Ok(a) => a,
        Err(err) => return Outcome::Disagree(format!("{p}: encoding failed: {err}")),
    };
    let inst = world.instance();
    match Evaluator::new(&inst, Some(module)).formula(&encoded) {
        Ok(b) if b == expected => Outcome::Agree,
        Ok(b) => Outcome::Disagree(format!("{p}: expected {expected}, got {b}")),
        Err(err) => Outcome::Disagree(format!("{p}: relational evaluation failed: {err}")),
    }
}
