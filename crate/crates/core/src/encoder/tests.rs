use std::collections::BTreeMap;

use super::*;
use crate::alloy::{eval_alloy_expr, parse_alloy_expr, parse_module, print_expr, print_module, Instance};
use crate::corpus;
use crate::frontend::{parse_expression, parse_machine, parse_predicate, Model};
use crate::typing::Ty;
use crate::value::{Atom, Relation};

fn typed(src: &str) -> TypedModel {
    let (m, c) = parse_machine(src).unwrap();
    TypedModel::new(Model::new(m, c).unwrap()).unwrap()
}

fn scopes(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn mutex() -> TypedModel {
    typed(corpus::source("mutex").unwrap())
}

const SCALAR: &str = "
CONTEXT C
SETS
  P
CONSTANTS
  c
AXIOMS
  c : P
END
MACHINE Scalar
SEES C
VARIABLES
  v
INVARIANTS
  v : P
INITIALISATION
  v := c
EVENT Foo
  GUARDS
    q : P
  ACTIONS
    v := q
END
END
";

#[test]
fn mutex_signature_set() {
    let enc = encode(
        &mutex(),
        &EncodeOptions::new(6, scopes(&[("Process", 2), ("Mutex", 2)])),
    )
    .unwrap();
    let mut names: Vec<&str> = enc.module.sig_names().collect();
    names.sort();
    let mut want = vec![
        "Process",
        "Mutex",
        "Events",
        "Undef",
        "HoldOnMutexE",
        "WaitOnMutexE",
        "ReleaseMutexE",
        "HoldsRel",
        "WaitsRel",
        "State",
    ];
    want.sort();
    assert_eq!(names, want);
    assert!(enc.warnings.is_empty());
}

#[test]
fn encoding_is_deterministic_and_reparses() {
    for (name, src) in corpus::SOURCES {
        let tm = typed(src);
        let a = corpus::annotation(src);
        let opts = EncodeOptions::new(a.states.unwrap_or(4), a.scopes.clone());
        let first = print_module(&encode(&tm, &opts).unwrap().module);
        let second = print_module(&encode(&tm, &opts).unwrap().module);
        assert_eq!(first, second, "{name}");
        let reparsed = parse_module(&first).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(reparsed, encode(&tm, &opts).unwrap().module, "{name}");
    }
}

#[test]
fn events_enum() {
    let tm = typed(SCALAR);
    let sigs = encode_events_enum(&tm.model.machine().events).unwrap();
    assert_eq!(sigs[1].names, ["Undef", "FooE"]);
    assert!(sigs[0].is_abstract);

    let collide = SCALAR.replace("END\nEND\n", "END\nEVENT FooE\n  ACTIONS\n    v := c\nEND\nEND\n");
    let tm = typed(&collide);
    assert!(matches!(
        encode_events_enum(&tm.model.machine().events),
        Err(EncodeError::EventNameCollision { .. })
    ));
    assert_eq!(encode_events_enum(&[]), Err(EncodeError::NoEvents));
    assert_eq!(encode_trigger(&[]), Err(EncodeError::NoEvents));
}

#[test]
fn no_events_is_an_error() {
    let tm = typed("MACHINE Empty\nEND\n");
    let err = encode(&tm, &EncodeOptions::new(2, BTreeMap::new())).unwrap_err();
    assert_eq!(err, EncodeError::NoEvents);
}

#[test]
fn scalar_variable_state() {
    let tm = typed(SCALAR);
    let enc = encode(&tm, &EncodeOptions::new(3, scopes(&[("P", 2)]))).unwrap();
    let state = enc.module.sig("State").unwrap();
    let fields: Vec<(&str, String)> = state
        .fields
        .iter()
        .map(|f| (f.name.as_str(), print_expr(&f.bound)))
        .collect();
    assert_eq!(fields, [("v", "P".to_string()), ("Ev", "Events".to_string())]);
    assert!(aux_sigs(&tm).is_empty());
    let init = enc.module.fact("Initial").unwrap();
    let text = crate::alloy::print_paragraph(&Paragraph::Fact(init.clone()));
    assert!(text.contains("s0.v = Consts.c"), "{text}");
    assert_eq!(
        enc.module.checks().next().unwrap().bounds,
        [("State".into(), 3), ("P".into(), 2)]
    );
}

#[test]
fn single_action_event_has_only_ev_frame() {
    let tm = typed(SCALAR);
    let pred = encode_event(&tm, 0, 4).unwrap();
    let expected = parse_alloy_expr(
        "{ some q : P {
             // Action
             s'.v = q
             s'.Ev = FooE
           } }",
    )
    .unwrap();
    assert_eq!(pred.body, expected);
}

#[test]
fn mutex_initial_has_three_equations() {
    let fact = encode_init(&mutex(), 4).unwrap();
    let expected = parse_alloy_expr(
        "{ let s0 = ord/first {
             s0.Holds.rel = none -> none
             s0.Waits.rel = none -> none
             s0.Ev = Undef
           } }",
    )
    .unwrap();
    assert_eq!(fact.body, expected);
}

fn mutex_ctx() -> EncodeContext {
    let tm = mutex();
    let mut ctx = EncodeContext::for_model(&tm, Some("s"), 4);
    ctx.push_local("p", Ty::Given("Process".into()));
    ctx.push_local("m", Ty::Given("Mutex".into()));
    ctx
}

#[test]
fn expression_examples() {
    let mut ctx = mutex_ctx();
    let enc = |ctx: &mut EncodeContext, s: &str| print_expr(&ctx.encode_expr(&parse_expression(s).unwrap()).unwrap());
    assert_eq!(enc(&mut ctx, "{p} <<| Holds"), "(dom[s.Holds.rel] - p) <: s.Holds.rel");
    assert_eq!(enc(&mut ctx, "{p} <| Holds"), "p <: s.Holds.rel");
    assert_eq!(enc(&mut ctx, "Holds |>> {m}"), "s.Holds.rel :> (ran[s.Holds.rel] - m)");
    assert_eq!(enc(&mut ctx, "Holds \\/ {p |-> m}"), "s.Holds.rel + p -> m");
    assert_eq!(enc(&mut ctx, "Holds \\/ {}"), "s.Holds.rel + none -> none");
    assert_eq!(enc(&mut ctx, "dom({})"), "dom[none -> none]");
    assert_eq!(enc(&mut ctx, "dom(prj1(Holds))"), "prj1[s.Holds.rel].univ");
    assert_eq!(enc(&mut ctx, "ran(prj2(Holds))"), "univ.(univ.prj2[s.Holds.rel])");
}

#[test]
fn predicate_examples() {
    let mut ctx = mutex_ctx();
    let enc = |ctx: &mut EncodeContext, s: &str| print_expr(&ctx.encode_pred(&parse_predicate(s).unwrap()).unwrap());
    assert_eq!(enc(&mut ctx, "p /: dom(Waits)"), "!(p in dom[s.Waits.rel])");
    assert_eq!(enc(&mut ctx, "dom(Waits) /= Process"), "!(dom[s.Waits.rel] = Process)");
    assert_eq!(enc(&mut ctx, "p = p"), "p = p");
    assert_eq!(
        enc(&mut ctx, "Holds : Process +-> Mutex"),
        "s.Holds.rel in Process -> lone Mutex"
    );
    assert_eq!(
        enc(&mut ctx, "Holds : Process >-> Mutex"),
        "s.Holds.rel in Process lone -> one Mutex"
    );
    assert_eq!(enc(&mut ctx, "Holds <: Waits"), "s.Holds.rel in s.Waits.rel");
    assert_eq!(
        enc(&mut ctx, "forall q . q : Process & q /= p => q |-> m /: Holds"),
        "all q : Process | !(q = p) implies !(q -> m in s.Holds.rel)"
    );
    assert_eq!(
        enc(&mut ctx, "exists q . q : dom(Holds)"),
        "some q : dom[s.Holds.rel] | no none"
    );
}

#[test]
fn invariant_assertions() {
    let two = corpus::source("mutex").unwrap().replace(
        "  dom(Waits) /= Process\n",
        "  dom(Waits) /= Process\n  Holds /\\ Waits = {}\n",
    );
    let (a, w) = encode_invariants(&typed(&two), "Two", 4).unwrap();
    assert!(w.is_none());
    let text = print_expr(&a.body);
    assert!(
        text.contains("!(dom[s.Waits.rel] = Process) and s.Holds.rel & s.Waits.rel = none -> none"),
        "{text}"
    );

    let (a, w) = encode_invariants(&typed(SCALAR), "None", 4).unwrap();
    assert!(w.is_some());
    assert_eq!(print_expr(&a.body), "{\n  all s : State | no none\n}");
}

#[test]
fn check_bounds() {
    let tm = mutex();
    let mut opts = EncodeOptions::new(2, scopes(&[("Process", 2), ("Mutex", 3)]));
    let c = emit_check(&tm, &opts, "A").unwrap();
    assert_eq!(
        crate::alloy::print_paragraph(&Paragraph::Check(c)),
        "check A for exactly 2 State, exactly 2 Process, exactly 3 Mutex, exactly 2 HoldsRel, exactly 2 WaitsRel\n"
    );
    opts.scopes.remove("Mutex");
    assert_eq!(
        emit_check(&tm, &opts, "A"),
        Err(EncodeError::MissingScope("Mutex".into()))
    );
    opts.scopes.insert("Mutex".into(), 0);
    assert_eq!(
        emit_check(&tm, &opts, "A"),
        Err(EncodeError::EmptyScope("Mutex".into()))
    );
    opts.scopes.insert("Mutex".into(), 1);
    opts.scopes.insert("Other".into(), 1);
    assert_eq!(
        emit_check(&tm, &opts, "A"),
        Err(EncodeError::UnknownScope("Other".into()))
    );
    opts.scopes.remove("Other");
    opts.num_states = 1;
    assert_eq!(encode(&tm, &opts).unwrap_err(), EncodeError::TooFewStates(1));
    opts.num_states = 2;
    opts.bitwidth = 0;
    assert_eq!(encode(&tm, &opts).unwrap_err(), EncodeError::Bitwidth(0));
}

#[test]
fn nested_type_gets_chain_and_class_fact() {
    let tm = typed(corpus::source("nested").unwrap());
    let specs = aux_sigs(&tm);
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["tableRel0", "tableRel"]);
    let fact = encode_class_fact(&specs[0]).unwrap();
    assert_eq!(fact.name.as_deref(), Some("tableRel0Class"));
    assert_eq!(
        print_expr(&fact.body),
        "{\n  all x : tableRel0 | x.rel in A -> one B\n}"
    );
    assert!(encode_class_fact(&specs[1]).is_none());
}

fn int_instance(bitwidth: u32, vars: &[(&str, i64)]) -> Instance {
    let mut inst = Instance::new(bitwidth);
    for (n, v) in vars {
        inst.bind(n, Relation::singleton(Atom::Int(*v)));
    }
    inst
}

#[test]
fn power_chain_at_bitwidth_three() {
    let chain = power_chain(AlloyExpr::name("a"), AlloyExpr::name("b"), 3).unwrap();
    assert_eq!(
        print_expr(&chain),
        "b = 0 implies 1 else b = 1 implies a else b = 2 implies mul[a, a] else b = 3 implies mul[a, mul[a, a]] else 0"
    );
    assert!(power_chain(AlloyExpr::name("a"), AlloyExpr::name("b"), MAX_POWER_BITWIDTH + 1).is_err());
    let wrapped = power_chain(
        AlloyExpr::call("plus", vec![AlloyExpr::name("a"), AlloyExpr::Int(0)]),
        AlloyExpr::name("b"),
        4,
    )
    .unwrap();
    assert!(matches!(wrapped, AlloyExpr::Let(..)));
    let inst = int_instance(4, &[("a", 2), ("b", 2)]);
    assert_eq!(
        eval_alloy_expr(&wrapped, &inst).unwrap(),
        Relation::singleton(Atom::Int(4))
    );
}

#[test]
fn unsupported_forms() {
    let tm = typed(corpus::source("nested").unwrap());
    let mut ctx = EncodeContext::for_model(&tm, Some("s"), 4);
    let e = parse_expression("dom(table) \\/ dom(table)").unwrap();
    assert!(ctx.encode_expr(&e).is_ok());
    let p = parse_predicate("table : (A --> B) <-> C").unwrap();
    assert!(matches!(ctx.encode_pred(&p), Err(EncodeError::Unsupported { .. })));
}
