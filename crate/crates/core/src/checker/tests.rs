use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::alloy::{AlloyExpr, BinaryOp, Evaluator, Instance};
use crate::corpus;
use crate::encoder::{class_arrow, encode, EncodeOptions};
use crate::frontend::{parse_expression, parse_machine, parse_predicate, Model, RelClass};
use crate::typing::TypedModel;
use crate::value::{Atom, Elem, Relation, Value};

fn typed(src: &str) -> TypedModel {
    let (m, c) = parse_machine(src).unwrap();
    TypedModel::new(Model::new(m, c).unwrap()).unwrap()
}

fn scope(pairs: &[(&str, u32)], depth: u32) -> Scope {
    Scope::new(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(), depth)
}

fn mutex() -> TypedModel {
    typed(corpus::source("mutex").unwrap())
}

fn el(set: &str, i: u32) -> Value {
    Value::Elem(Elem::indexed(set, i))
}

fn pairs(ps: &[(Value, Value)]) -> Value {
    Value::Set(ps.iter().map(|(a, b)| Value::pair(a.clone(), b.clone())).collect())
}

fn mutex_env() -> Env {
    let mut env = Env::new(4);
    env.bind("Process", carrier_values("Process", 2));
    env.bind("Mutex", carrier_values("Mutex", 2));
    env.bind("p1", el("Process", 0));
    env.bind("p2", el("Process", 1));
    env.bind("m1", el("Mutex", 0));
    env.bind("m2", el("Mutex", 1));
    env.bind(
        "H",
        pairs(&[(el("Process", 0), el("Mutex", 0)), (el("Process", 1), el("Mutex", 1))]),
    );
    env
}

fn ev(text: &str, env: &Env) -> Value {
    eval_expr(&parse_expression(text).unwrap(), env).unwrap()
}

#[test]
fn relational_operators() {
    let env = mutex_env();
    assert_eq!(ev("{p1} <<| H", &env), pairs(&[(el("Process", 1), el("Mutex", 1))]));
    assert_eq!(ev("dom({})", &env), Value::empty_set());
    assert_eq!(ev("ran({p1} <| H)", &env), Value::Set(BTreeSet::from([el("Mutex", 0)])));
    assert_eq!(ev("H |> {m2}", &env), pairs(&[(el("Process", 1), el("Mutex", 1))]));
    assert_eq!(ev("H |>> {m2}", &env), pairs(&[(el("Process", 0), el("Mutex", 0))]));
    assert_eq!(ev("H \\ {p1 |-> m1}", &env), ev("{p2 |-> m2}", &env));
}

#[test]
fn arithmetic_wraps_and_rejects_undefined() {
    let env = Env::new(4);
    assert_eq!(ev("7 + 1", &env), Value::Int(-8));
    assert_eq!(ev("2 ^ 3", &env), Value::Int(-8));
    assert_eq!(ev("7 / 2", &env), Value::Int(3));
    for bad in ["1 / 0", "1 mod 0", "(0 - 1) mod 2", "2 ^ (0 - 1)"] {
        let e = parse_expression(bad).unwrap();
        assert!(
            matches!(eval_expr(&e, &env), Err(EvalError::NotWellDefined { .. })),
            "{bad}"
        );
    }
}

#[test]
fn quantifiers_range_over_their_domains() {
    let mut env = mutex_env();
    let t = |s: &str, env: &mut Env| eval_pred(&parse_predicate(s).unwrap(), env).unwrap();
    assert!(t("forall p . p : Process => p : dom(H)", &mut env));
    assert!(!t("exists m . m : Mutex & m /: ran(H)", &mut env));
    assert!(t(
        "exists p, m . p : Process & m : Mutex & p |-> m : H & m = m2",
        &mut env
    ));
    assert!(t("H : Process >-> Mutex", &mut env));
    assert!(!t("{p1 |-> m1} : Process --> Mutex", &mut env));
}

#[test]
fn initial_state_has_four_successors() {
    let tm = mutex();
    let w = &worlds(&tm, &scope(&[("Process", 2), ("Mutex", 2)], 6)).unwrap()[0];
    let s0 = initial_state(&tm, w).unwrap();
    assert_eq!(s0["Holds"], Value::empty_set());
    let succ = successors(&tm, w, &s0).unwrap();
    assert_eq!(succ.len(), 4);
    assert!(succ.iter().all(|(e, b, _)| *e == 0 && b.len() == 2));
    // Bindings come in lexicographic order.
    assert_eq!(succ[0].1[0].1, el("Process", 0));
    assert_eq!(succ[0].1[1].1, el("Mutex", 0));
    assert_eq!(succ[1].1[1].1, el("Mutex", 1));
}

#[test]
fn deadlocked_state_has_no_successors() {
    let tm = mutex();
    let w = &worlds(&tm, &scope(&[("Process", 2), ("Mutex", 2)], 6)).unwrap()[0];
    let mut s = ConcreteState::new();
    s.insert(
        "Holds".into(),
        pairs(&[(el("Process", 0), el("Mutex", 0)), (el("Process", 1), el("Mutex", 1))]),
    );
    s.insert(
        "Waits".into(),
        pairs(&[(el("Process", 0), el("Mutex", 1)), (el("Process", 1), el("Mutex", 0))]),
    );
    assert!(successors(&tm, w, &s).unwrap().is_empty());
    assert_eq!(violated_invariant(&tm, w, &s).unwrap(), Some(2));
}

#[test]
fn mutex_violation_is_found_at_depth_four() {
    let tm = mutex();
    let r = check(&tm, &scope(&[("Process", 2), ("Mutex", 2)], 6), DEFAULT_NODE_BUDGET).unwrap();
    let Verdict::Violation { trace, invariant } = r.verdict else {
        panic!("expected a violation")
    };
    assert_eq!(invariant, 2);
    assert_eq!(trace.depth(), 4);
    assert_eq!(trace.steps[0].event, "Undef");
    let events: Vec<&str> = trace.steps[1..].iter().map(|s| s.event.as_str()).collect();
    assert_eq!(events, ["HoldOnMutex", "HoldOnMutex", "WaitOnMutex", "WaitOnMutex"]);

    let shallow = check(&tm, &scope(&[("Process", 2), ("Mutex", 2)], 3), DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(shallow.verdict, Verdict::NoViolationWithinDepth(3));

    let tiny = check(&tm, &scope(&[("Process", 1), ("Mutex", 1)], 6), DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(tiny.verdict, Verdict::NoViolationWithinDepth(6));
}

#[test]
fn node_budget_is_enforced() {
    let tm = mutex();
    let e = check(&tm, &scope(&[("Process", 2), ("Mutex", 2)], 6), 3).unwrap_err();
    assert_eq!(e, CheckError::NodeBudget(3));
}

#[test]
fn scope_errors() {
    let tm = mutex();
    let e = |s: Scope| check(&tm, &s, 10).unwrap_err();
    assert_eq!(e(scope(&[("Process", 2)], 1)), CheckError::MissingScope("Mutex".into()));
    assert_eq!(
        e(scope(&[("Process", 2), ("Mutex", 2), ("Lock", 1)], 1)),
        CheckError::UnknownScope("Lock".into())
    );
    assert_eq!(
        e(scope(&[("Process", 0), ("Mutex", 2)], 1)),
        CheckError::EmptyScope("Process".into())
    );
}

#[test]
fn machine_without_state_is_checked() {
    let tm = typed(corpus::source("idle").unwrap());
    let r = check(&tm, &scope(&[], 3), DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(r.verdict, Verdict::NoViolationWithinDepth(3));
    assert_eq!(r.stats.states, 1);
}

const OUT_OF_TYPE: &str = "
CONTEXT C
SETS
  P
END
MACHINE Grow
SEES C
VARIABLES
  f
INVARIANTS
  f : P +-> P
INITIALISATION
  f := {}
EVENT Add
  GUARDS
    x : P
    y : P
  ACTIONS
    f := f \\/ {x |-> y}
END
END
";

#[test]
fn action_leaving_the_type_is_an_error() {
    let tm = typed(OUT_OF_TYPE);
    let e = check(&tm, &scope(&[("P", 2)], 3), DEFAULT_NODE_BUDGET).unwrap_err();
    assert!(
        matches!(e, CheckError::OutOfType { ref variable, .. } if variable == "f"),
        "{e}"
    );
}

const CONSTANTS: &str = "
CONTEXT C
SETS
  P
CONSTANTS
  a
  b
AXIOMS
  a : P
  b : P
  a /= b
END
MACHINE Pick
SEES C
VARIABLES
  v
INVARIANTS
  v : P
  v = a
INITIALISATION
  v := a
EVENT Swap
  ACTIONS
    v := b
END
END
";

#[test]
fn every_constant_valuation_is_explored() {
    let tm = typed(CONSTANTS);
    let s = scope(&[("P", 2)], 2);
    assert_eq!(worlds(&tm, &s).unwrap().len(), 2);
    let r = check(&tm, &s, DEFAULT_NODE_BUDGET).unwrap();
    let Verdict::Violation { trace, invariant } = r.verdict else {
        panic!()
    };
    assert_eq!(invariant, 1);
    assert_eq!(trace.depth(), 1);
    assert_eq!(trace.constants["a"], el("P", 0));
    assert_eq!(
        check(&tm, &scope(&[("P", 1)], 2), 100).unwrap_err(),
        CheckError::NoConstants
    );
}

#[test]
fn structured_report_round_trips() {
    let tm = mutex();
    let s = scope(&[("Process", 2), ("Mutex", 2)], 6);
    let r = check(&tm, &s, DEFAULT_NODE_BUDGET).unwrap();
    let json = format_trace(&tm, &s, &r, TraceFormat::Structured);
    let back: TraceReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, TraceReport::new(&tm, &s, &r));
    assert_eq!(back.verdict, "violation");
    assert_eq!(back.trace.len(), 5);
    assert_eq!(back.trace[1].params[0].name, "p");
    assert_eq!(
        back.trace[1].state["Holds"],
        serde_json::json!([["Process0", "Mutex0"]])
    );

    let text = format_trace(&tm, &s, &r, TraceFormat::Text);
    assert!(text.starts_with("Dijkstra: invariant 3 violated at depth 4"), "{text}");
    assert!(text.contains("step 1: HoldOnMutex(p = Process0, m = Mutex0)"), "{text}");
    assert!(text.contains("  Holds = {Process0 |-> Mutex0}"), "{text}");
}

#[test]
fn value_json_shapes() {
    let v = Value::pair(Value::pair(Value::Int(1), Value::Int(2)), Value::Int(3));
    assert_eq!(value_json(&v), serde_json::json!([1, 2, 3]));
    assert_eq!(value_json(&Value::empty_set()), serde_json::json!([]));
}

#[test]
fn violation_trace_is_an_instance_of_the_encoding() {
    let tm = mutex();
    let s = scope(&[("Process", 2), ("Mutex", 2)], 6);
    let Verdict::Violation { trace, .. } = check(&tm, &s, DEFAULT_NODE_BUDGET).unwrap().verdict else {
        panic!()
    };
    let module = encode(&tm, &EncodeOptions::new(5, s.sets.clone())).unwrap().module;
    let world = world_of(&tm, &s, &trace).unwrap();
    let inst = instance_for_states(&tm, &world, &trace.steps);
    let mut e = Evaluator::new(&inst, Some(&module));
    for name in ["Initial", "EventTrigger"] {
        assert!(e.formula(&module.fact(name).unwrap().body).unwrap(), "{name}");
    }
    let assertion = &module.paragraphs.iter().find_map(|p| match p {
        crate::alloy::Paragraph::Assert(a) => Some(a.clone()),
        _ => None,
    });
    assert!(!e.formula(&assertion.as_ref().unwrap().body).unwrap());
}

/// Independent statement of each class over explicit finite sets.
fn class_oracle(rel: &BTreeSet<(u32, u32)>, class: RelClass, n: u32) -> bool {
    let functional = (0..n).all(|x| rel.iter().filter(|p| p.0 == x).count() <= 1);
    let total = (0..n).all(|x| rel.iter().any(|p| p.0 == x));
    let surjective = (0..n).all(|y| rel.iter().any(|p| p.1 == y));
    let injective = (0..n).all(|y| rel.iter().filter(|p| p.1 == y).count() <= 1);
    match class {
        RelClass::Relation => true,
        RelClass::PartialFn => functional,
        RelClass::TotalFn => functional && total,
        RelClass::PartialSurj => functional && surjective,
        RelClass::TotalSurj => functional && total && surjective,
        RelClass::TotalInj => functional && total && injective,
    }
}

#[test]
fn class_checks_agree_with_definitions_and_multiplicities() {
    let n = 2u32;
    let a = |i| Value::Elem(Elem::indexed("A", i));
    let b = |i| Value::Elem(Elem::indexed("B", i));
    let all: Vec<(u32, u32)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    let dom: BTreeSet<Value> = (0..n).map(a).collect();
    let ran: BTreeSet<Value> = (0..n).map(b).collect();
    let mut inst = Instance::new(4);
    inst.bind("A", Relation::unary((0..n).map(|i| Atom::Elem(Elem::indexed("A", i)))));
    inst.bind("B", Relation::unary((0..n).map(|i| Atom::Elem(Elem::indexed("B", i)))));
    for mask in 0u32..(1 << all.len()) {
        let rel: BTreeSet<(u32, u32)> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        let ps: Vec<(Value, Value)> = rel.iter().map(|(x, y)| (a(*x), b(*y))).collect();
        let tuples: BTreeSet<Vec<Atom>> = rel
            .iter()
            .map(|(x, y)| vec![Atom::Elem(Elem::indexed("A", *x)), Atom::Elem(Elem::indexed("B", *y))])
            .collect();
        let mut inst = inst.clone();
        inst.bind(
            "r",
            Relation::from_tuples(2, tuples).unwrap_or_else(|| Relation::empty(2)),
        );
        for class in RelClass::ALL {
            let expected = class_oracle(&rel, class, n);
            assert_eq!(
                satisfies_class(&ps, class, Some(&dom), Some(&ran)),
                expected,
                "{class:?} {rel:?}"
            );
            let (left_mult, right_mult) = class_arrow(class);
            let f = AlloyExpr::binary(
                BinaryOp::In,
                AlloyExpr::name("r"),
                AlloyExpr::Product {
                    left: Box::new(AlloyExpr::name("A")),
                    left_mult,
                    right_mult,
                    right: Box::new(AlloyExpr::name("B")),
                },
            );
            assert_eq!(
                Evaluator::new(&inst, None).formula(&f).unwrap(),
                expected,
                "{class:?} {rel:?}"
            );
        }
    }
}

#[test]
fn scopes_map_is_ordered() {
    let s = scope(&[("Mutex", 2), ("Process", 3)], 1);
    assert_eq!(
        s.sets,
        BTreeMap::from([("Mutex".to_string(), 2), ("Process".to_string(), 3)])
    );
    assert_eq!(s.bitwidth, 4);
}
