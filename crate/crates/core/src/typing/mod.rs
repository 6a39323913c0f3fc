//! Variable types: extraction from typing invariants, flattening of nested
//! relational types, and a type checker for expressions and predicates.

mod types;

use std::collections::BTreeMap;

pub use types::*;

use crate::frontend::{quantifier_domains, BinOp, CmpOp, Expr, Model, Pos, Pred, Symbol, UnOp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unknown identifier '{0}'")]
    Unknown(String),
    #[error("'{expr}' has type {found}, expected {expected}")]
    Mismatch {
        expr: String,
        expected: String,
        found: String,
    },
    #[error("set literal '{0}' mixes element types")]
    Heterogeneous(String),
    #[error("type constructor '{0}' can only appear on the right of a membership")]
    ConstructorAsValue(String),
    #[error("'{expr}' ranges over {found}; only sets of scalars can bind a variable")]
    NonScalarDomain { expr: String, found: String },
    #[error("cannot determine the element type of '{0}'")]
    Ambiguous(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypingError {
    #[error("{pos}: variable '{name}' has no typing invariant '{name} : T'")]
    MissingTyping { name: String, pos: Pos },
    #[error("{pos}: the only membership invariant of '{name}' is not a type expression")]
    NonTypeMembership { name: String, pos: Pos },
    #[error("{pos}: constant '{name}' has no typing axiom '{name} : T'")]
    MissingConstantTyping { name: String, pos: Pos },
    #[error("{pos}: constant '{name}' must have a carrier set, enumerated set, or INT as type")]
    RelationalConstant { name: String, pos: Pos },
    #[error("{pos}: {message}")]
    UnsupportedType { pos: Pos, message: String },
    #[error("{pos}: {source}")]
    IllTyped { pos: Pos, source: TypeError },
}

/// Types of the machine variables and context constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeEnv {
    pub variables: BTreeMap<String, TypeTerm>,
    /// Index of each variable's typing invariant.
    pub typing_invariant: BTreeMap<String, usize>,
    pub constants: BTreeMap<String, TypeTerm>,
    /// Index of each constant's typing axiom.
    pub typing_axiom: BTreeMap<String, usize>,
}

impl TypeEnv {
    pub fn var_type(&self, name: &str) -> Option<&TypeTerm> {
        self.variables.get(name)
    }

    pub fn is_typing_invariant(&self, index: usize) -> bool {
        self.typing_invariant.values().any(|&i| i == index)
    }

    pub fn is_typing_axiom(&self, index: usize) -> bool {
        self.typing_axiom.values().any(|&i| i == index)
    }
}

/// Converts a pure type expression (type constructors over carrier sets,
/// enumerated sets, and INT) into a `TypeTerm`.
pub fn type_term_of(e: &Expr, model: &Model) -> Option<TypeTerm> {
    match e {
        Expr::Ident(n) => match model.lookup(n)? {
            Symbol::CarrierSet | Symbol::EnumSet => Some(TypeTerm::Given(n.clone())),
            Symbol::Integers => Some(TypeTerm::Integer),
            _ => None,
        },
        Expr::TypeCtor(class, a, b) => Some(TypeTerm::rel(type_term_of(a, model)?, type_term_of(b, model)?, *class)),
        _ => None,
    }
}

fn check_supported(t: &TypeTerm, pos: Pos) -> Result<(), TypingError> {
    if let TypeTerm::Rel(a, b, class) = t {
        let facts = side_facts(*class);
        if facts.contains(&SideFact::Total) && !a.is_scalar() {
            return Err(TypingError::UnsupportedType {
                pos,
                message: format!("{} over a relational domain is not supported", class.name()),
            });
        }
        if facts.contains(&SideFact::Surjective) && !b.is_scalar() {
            return Err(TypingError::UnsupportedType {
                pos,
                message: format!("{} onto a relational range is not supported", class.name()),
            });
        }
        check_supported(a, pos)?;
        check_supported(b, pos)?;
    }
    Ok(())
}

/// Reads each variable's type from its first membership invariant whose
/// right side is a pure type expression, and each constant's from its
/// axioms likewise. Constants must be scalar.
pub fn infer_types(model: &Model) -> Result<TypeEnv, TypingError> {
    let m = model.machine();
    let mut env = TypeEnv {
        variables: BTreeMap::new(),
        typing_invariant: BTreeMap::new(),
        constants: BTreeMap::new(),
        typing_axiom: BTreeMap::new(),
    };
    for var in &m.variables {
        let mut has_membership = false;
        for (i, inv) in m.invariants.iter().enumerate() {
            if let Some((x, rhs)) = inv.node.as_membership() {
                if x != var.node {
                    continue;
                }
                has_membership = true;
                if let Some(t) = type_term_of(rhs, model) {
                    check_supported(&t, inv.pos)?;
                    env.variables.insert(var.node.clone(), t);
                    env.typing_invariant.insert(var.node.clone(), i);
                    break;
                }
            }
        }
        if !env.variables.contains_key(&var.node) {
            let name = var.node.clone();
            return Err(if has_membership {
                TypingError::NonTypeMembership { name, pos: var.pos }
            } else {
                TypingError::MissingTyping { name, pos: var.pos }
            });
        }
    }
    let ctx = model.context();
    for c in &ctx.constants {
        for (i, ax) in ctx.axioms.iter().enumerate() {
            if let Some((x, rhs)) = ax.node.as_membership() {
                if x == c.node {
                    if let Some(t) = type_term_of(rhs, model) {
                        if !t.is_scalar() {
                            return Err(TypingError::RelationalConstant {
                                name: c.node.clone(),
                                pos: c.pos,
                            });
                        }
                        env.constants.insert(c.node.clone(), t);
                        env.typing_axiom.insert(c.node.clone(), i);
                        break;
                    }
                }
            }
        }
        if !env.constants.contains_key(&c.node) {
            return Err(TypingError::MissingConstantTyping {
                name: c.node.clone(),
                pos: c.pos,
            });
        }
    }
    Ok(env)
}

/// Result of flattening one variable type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flattened {
    /// Auxiliary signatures, innermost first.
    pub sigs: Vec<SigSpec>,
    /// Type of the State field: the outermost signature or the scalar set.
    pub field_type: String,
}

/// Name of the target signature for a scalar type.
pub fn scalar_sig_name(t: &TypeTerm) -> &str {
    match t {
        TypeTerm::Given(s) => s,
        TypeTerm::Integer => "Int",
        TypeTerm::Rel(..) => unreachable!("relational type has no scalar signature"),
    }
}

/// Auxiliary signature assigned to each constructor of a type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigTree {
    Scalar(String),
    Rel {
        name: String,
        left: Box<SigTree>,
        right: Box<SigTree>,
    },
}

impl SigTree {
    /// Signature whose atoms represent values of this type.
    pub fn sig_name(&self) -> &str {
        match self {
            SigTree::Scalar(n) => n,
            SigTree::Rel { name, .. } => name,
        }
    }
}

/// Names every constructor of `t`. The outermost is `<base>Rel`; inner ones
/// are `<base>Rel0`, `<base>Rel1`, ... in post-order.
pub fn sig_tree(t: &TypeTerm, base: &str) -> SigTree {
    fn go(t: &TypeTerm, base: &str, outer: bool, counter: &mut usize) -> SigTree {
        match t {
            TypeTerm::Rel(a, b, _) => {
                let left = go(a, base, false, counter);
                let right = go(b, base, false, counter);
                let name = if outer {
                    format!("{base}Rel")
                } else {
                    *counter += 1;
                    format!("{base}Rel{}", *counter - 1)
                };
                SigTree::Rel {
                    name,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
            scalar => SigTree::Scalar(scalar_sig_name(scalar).to_string()),
        }
    }
    go(t, base, true, &mut 0)
}

/// One signature per relational constructor, innermost first, named as in
/// `sig_tree`. Each holds a single flat field `rel`.
pub fn flatten_type(t: &TypeTerm, base: &str) -> Flattened {
    fn go(t: &TypeTerm, tree: &SigTree, out: &mut Vec<SigSpec>) {
        if let (TypeTerm::Rel(a, b, class), SigTree::Rel { name, left, right }) = (t, tree) {
            go(a, left, out);
            go(b, right, out);
            out.push(SigSpec {
                name: name.clone(),
                field_name: "rel".to_string(),
                left: left.sig_name().to_string(),
                right: right.sig_name().to_string(),
                side_facts: side_facts(*class),
            });
        }
    }
    let tree = sig_tree(t, base);
    let mut sigs = Vec::new();
    go(t, &tree, &mut sigs);
    Flattened {
        sigs,
        field_type: tree.sig_name().to_string(),
    }
}

/// Identifier types in scope: globals plus a stack of locals.
#[derive(Clone, Debug)]
pub struct TypeScope {
    globals: BTreeMap<String, Ty>,
    locals: Vec<(String, Ty)>,
}

impl TypeScope {
    pub fn new(model: &Model, env: &TypeEnv) -> Self {
        let mut globals = BTreeMap::new();
        for (name, sym) in model.symbols() {
            let ty = match sym {
                Symbol::CarrierSet | Symbol::EnumSet => Ty::set(Ty::Given(name.clone())),
                Symbol::Integers => Ty::set(Ty::Int),
                Symbol::EnumMember { set, .. } => Ty::Given(set.clone()),
                Symbol::Constant(_) => env.constants[name].value_ty(),
                Symbol::Variable(_) => env.variables[name].value_ty(),
            };
            globals.insert(name.clone(), ty);
        }
        TypeScope {
            globals,
            locals: Vec::new(),
        }
    }

    /// A scope over explicitly typed globals, without a model.
    pub fn from_globals(globals: BTreeMap<String, Ty>) -> Self {
        TypeScope {
            globals,
            locals: Vec::new(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&Ty> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .or_else(|| self.globals.get(name))
    }

    pub fn push(&mut self, name: &str, ty: Ty) {
        self.locals.push((name.to_string(), ty));
    }

    pub fn depth(&self) -> usize {
        self.locals.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.locals.truncate(depth);
    }
}

fn mismatch(e: &Expr, expected: impl ToString, found: &Ty) -> TypeError {
    TypeError::Mismatch {
        expr: e.to_string(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

fn expect(e: &Expr, found: Ty, expected: &Ty) -> Result<Ty, TypeError> {
    unify(&found, expected).ok_or_else(|| mismatch(e, expected, &found))
}

fn relation_parts(e: &Expr, t: Ty) -> Result<(Ty, Ty), TypeError> {
    match expect(e, t, &Ty::set(Ty::pair(Ty::Unknown, Ty::Unknown)))? {
        Ty::Set(p) => match *p {
            Ty::Pair(a, b) => Ok((*a, *b)),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn set_elem(e: &Expr, t: Ty) -> Result<Ty, TypeError> {
    match expect(e, t, &Ty::set(Ty::Unknown))? {
        Ty::Set(x) => Ok(*x),
        _ => unreachable!(),
    }
}

/// Type of a value expression. Type constructors are rejected here; they
/// are only meaningful as membership right-hand sides.
pub fn type_of(e: &Expr, scope: &TypeScope) -> Result<Ty, TypeError> {
    match e {
        Expr::Ident(n) => scope.lookup(n).cloned().ok_or_else(|| TypeError::Unknown(n.clone())),
        Expr::Int(_) => Ok(Ty::Int),
        Expr::EmptySet => Ok(Ty::set(Ty::Unknown)),
        Expr::SetLit(items) => {
            let mut t = Ty::Unknown;
            for x in items {
                let tx = type_of(x, scope)?;
                t = unify(&t, &tx).ok_or_else(|| TypeError::Heterogeneous(e.to_string()))?;
            }
            Ok(Ty::set(t))
        }
        Expr::Maplet(a, b) => Ok(Ty::pair(type_of(a, scope)?, type_of(b, scope)?)),
        Expr::Unary(op, a) => {
            let ta = type_of(a, scope)?;
            match op {
                UnOp::Dom => Ok(Ty::set(relation_parts(a, ta)?.0)),
                UnOp::Ran => Ok(Ty::set(relation_parts(a, ta)?.1)),
                UnOp::Prj1 => {
                    let (x, y) = relation_parts(a, ta)?;
                    Ok(Ty::set(Ty::pair(Ty::pair(x.clone(), y), x)))
                }
                UnOp::Prj2 => {
                    let (x, y) = relation_parts(a, ta)?;
                    Ok(Ty::set(Ty::pair(Ty::pair(x, y.clone()), y)))
                }
                UnOp::Id => {
                    let x = set_elem(a, ta)?;
                    Ok(Ty::set(Ty::pair(x.clone(), x)))
                }
            }
        }
        Expr::Binary(op, a, b) => {
            let ta = type_of(a, scope)?;
            let tb = type_of(b, scope)?;
            match op {
                BinOp::Union | BinOp::Inter | BinOp::SetMinus => {
                    let ta = expect(a, ta, &Ty::set(Ty::Unknown))?;
                    expect(b, tb, &ta)
                }
                BinOp::DomRes | BinOp::DomSub => {
                    let s = set_elem(a, ta)?;
                    let (x, y) = relation_parts(b, tb)?;
                    let x = unify(&s, &x).ok_or_else(|| mismatch(a, Ty::set(x.clone()), &Ty::set(s)))?;
                    Ok(Ty::set(Ty::pair(x, y)))
                }
                BinOp::RanRes | BinOp::RanSub => {
                    let (x, y) = relation_parts(a, ta)?;
                    let s = set_elem(b, tb)?;
                    let y = unify(&s, &y).ok_or_else(|| mismatch(b, Ty::set(y.clone()), &Ty::set(s)))?;
                    Ok(Ty::set(Ty::pair(x, y)))
                }
                _ => {
                    expect(a, ta, &Ty::Int)?;
                    expect(b, tb, &Ty::Int)?;
                    Ok(Ty::Int)
                }
            }
        }
        Expr::TypeCtor(..) => Err(TypeError::ConstructorAsValue(e.to_string())),
    }
}

/// Type of a membership right-hand side, which may be built with type
/// constructors.
pub fn type_of_set(e: &Expr, scope: &TypeScope) -> Result<Ty, TypeError> {
    match e {
        Expr::TypeCtor(_, a, b) => {
            let x = set_elem(a, type_of_set(a, scope)?)?;
            let y = set_elem(b, type_of_set(b, scope)?)?;
            Ok(Ty::set(Ty::set(Ty::pair(x, y))))
        }
        other => type_of(other, scope),
    }
}

/// Element type of a quantifier or parameter domain, which must be a set of
/// scalars.
pub fn domain_elem(e: &Expr, scope: &TypeScope) -> Result<Ty, TypeError> {
    let t = type_of(e, scope)?;
    match &t {
        Ty::Set(x) if x.is_scalar() => Ok((**x).clone()),
        _ => Err(TypeError::NonScalarDomain {
            expr: e.to_string(),
            found: t.to_string(),
        }),
    }
}

pub fn check_pred(p: &Pred, scope: &mut TypeScope) -> Result<(), TypeError> {
    match p {
        Pred::Cmp(op, a, b) => match op {
            CmpOp::In | CmpOp::NotIn => {
                let ts = type_of_set(b, scope)?;
                let elem = set_elem(b, ts)?;
                expect(a, type_of(a, scope)?, &elem).map(drop)
            }
            CmpOp::Subset => {
                let ta = expect(a, type_of(a, scope)?, &Ty::set(Ty::Unknown))?;
                expect(b, type_of(b, scope)?, &ta).map(drop)
            }
            CmpOp::Eq | CmpOp::Neq => {
                let ta = type_of(a, scope)?;
                expect(b, type_of(b, scope)?, &ta).map(drop)
            }
            CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                expect(a, type_of(a, scope)?, &Ty::Int)?;
                expect(b, type_of(b, scope)?, &Ty::Int).map(drop)
            }
        },
        Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
            check_pred(a, scope)?;
            check_pred(b, scope)
        }
        Pred::Not(a) => check_pred(a, scope),
        Pred::Forall(vars, body) | Pred::Exists(vars, body) => {
            let universal = matches!(p, Pred::Forall(..));
            let domains = quantifier_domains(vars, body, universal).map_err(|v| TypeError::Ambiguous(v.to_string()))?;
            let depth = scope.depth();
            for (v, dom) in vars.iter().zip(domains) {
                let t = domain_elem(dom, scope)?;
                scope.push(v, t);
            }
            let r = check_pred(body, scope);
            scope.truncate(depth);
            r
        }
    }
}

/// Type-checks every axiom, invariant, initial assignment, guard, and
/// action. Parameters and quantified variables must range over sets of
/// scalars.
pub fn check_model(model: &Model, env: &TypeEnv) -> Result<(), TypingError> {
    let mut scope = TypeScope::new(model, env);
    let ill = |pos: Pos| move |source: TypeError| TypingError::IllTyped { pos, source };
    for ax in &model.context().axioms {
        check_pred(&ax.node, &mut scope).map_err(ill(ax.pos))?;
    }
    let m = model.machine();
    for inv in &m.invariants {
        check_pred(&inv.node, &mut scope).map_err(ill(inv.pos))?;
    }
    let assign = |scope: &TypeScope, target: &str, value: &Expr| -> Result<(), TypeError> {
        let want = env.variables[target].value_ty();
        expect(value, type_of(value, scope)?, &want).map(drop)
    };
    for act in &m.initialisation {
        assign(&scope, &act.node.target.node, &act.node.value).map_err(ill(act.pos))?;
    }
    for (ei, ev) in m.events.iter().enumerate() {
        let depth = scope.depth();
        let params = model.params(ei);
        for (gi, g) in ev.guards.iter().enumerate() {
            if let Some(p) = params.iter().find(|p| p.guard_index == gi) {
                let t = domain_elem(&p.domain, &scope).map_err(ill(g.pos))?;
                scope.push(&p.name, t);
            } else {
                check_pred(&g.node, &mut scope).map_err(ill(g.pos))?;
            }
        }
        for act in &ev.actions {
            assign(&scope, &act.node.target.node, &act.node.value).map_err(ill(act.pos))?;
        }
        scope.truncate(depth);
    }
    Ok(())
}

/// A model together with its checked types.
#[derive(Clone, Debug)]
pub struct TypedModel {
    pub model: Model,
    pub types: TypeEnv,
}

impl TypedModel {
    pub fn new(model: Model) -> Result<Self, TypingError> {
        let types = infer_types(&model)?;
        check_model(&model, &types)?;
        Ok(TypedModel { model, types })
    }

    pub fn scope(&self) -> TypeScope {
        TypeScope::new(&self.model, &self.types)
    }

    /// Type scope inside event `index`, with its parameters bound.
    pub fn event_scope(&self, index: usize) -> TypeScope {
        let mut scope = self.scope();
        for p in self.model.params(index) {
            let t = domain_elem(&p.domain, &scope).expect("checked at construction");
            scope.push(&p.name, t);
        }
        scope
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_machine, RelClass};

    fn model(src: &str) -> Model {
        let (m, c) = parse_machine(src).unwrap();
        Model::new(m, c).unwrap()
    }

    fn given(s: &str) -> TypeTerm {
        TypeTerm::Given(s.to_string())
    }

    #[test]
    fn mutex_types() {
        let m = model(include_str!("../../corpus/mutex.ebm"));
        let env = infer_types(&m).unwrap();
        assert_eq!(
            env.variables["Holds"],
            TypeTerm::rel(given("Process"), given("Mutex"), RelClass::Relation)
        );
        assert_eq!(env.typing_invariant["Waits"], 1);
        assert!(!env.is_typing_invariant(2));
        check_model(&m, &env).unwrap();
    }

    #[test]
    fn scalar_and_missing_typing() {
        let m = model(
            "CONTEXT C ENUM Colour = {Red} END MACHINE M SEES C VARIABLES v w
            INVARIANTS v : Colour  w : dom({v |-> v})
            INITIALISATION v := Red w := Red END",
        );
        match infer_types(&m) {
            Err(TypingError::NonTypeMembership { name, .. }) => assert_eq!(name, "w"),
            other => panic!("{other:?}"),
        }
        let m = model("MACHINE M VARIABLES Waits INVARIANTS Waits = {} INITIALISATION Waits := {} END");
        match infer_types(&m) {
            Err(TypingError::MissingTyping { name, .. }) => assert_eq!(name, "Waits"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flatten_examples() {
        let t = TypeTerm::rel(given("Process"), given("Mutex"), RelClass::Relation);
        let f = flatten_type(&t, "Holds");
        assert_eq!(f.field_type, "HoldsRel");
        assert_eq!(f.sigs.len(), 1);
        assert_eq!(
            (f.sigs[0].left.as_str(), f.sigs[0].right.as_str()),
            ("Process", "Mutex")
        );
        assert!(f.sigs[0].side_facts.is_empty());

        let t = TypeTerm::rel(
            TypeTerm::rel(given("A"), given("B"), RelClass::TotalFn),
            given("C"),
            RelClass::Relation,
        );
        let f = flatten_type(&t, "F");
        let names: Vec<&str> = f.sigs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["FRel0", "FRel"]);
        assert_eq!(f.sigs[0].side_facts, [SideFact::Functional, SideFact::Total]);
        assert_eq!(f.sigs[1].left, "FRel0");

        let f = flatten_type(&given("Process"), "v");
        assert!(f.sigs.is_empty());
        assert_eq!(f.field_type, "Process");
    }

    #[test]
    fn signature_count_matches_constructor_count() {
        let a = || given("A");
        let t = TypeTerm::rel(
            TypeTerm::rel(a(), TypeTerm::rel(a(), a(), RelClass::PartialFn), RelClass::Relation),
            TypeTerm::rel(a(), TypeTerm::Integer, RelClass::TotalInj),
            RelClass::Relation,
        );
        let f = flatten_type(&t, "x");
        assert_eq!(f.sigs.len(), t.constructor_count());
        let mut names: Vec<&str> = f.sigs.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 4);
    }

    #[test]
    fn rejects_ill_typed_guard() {
        let m = model(
            "CONTEXT C SETS P END MACHINE M SEES C VARIABLES x
            INVARIANTS x : P <-> P INITIALISATION x := {}
            EVENT E GUARDS p : P  p : x ACTIONS x := {} END END",
        );
        let env = infer_types(&m).unwrap();
        assert!(matches!(check_model(&m, &env), Err(TypingError::IllTyped { .. })));
    }

    #[test]
    fn rejects_relational_parameter() {
        let m = model(
            "CONTEXT C SETS P END MACHINE M SEES C VARIABLES x
            INVARIANTS x : P <-> P INITIALISATION x := {}
            EVENT E GUARDS r : P <-> P ACTIONS x := r END END",
        );
        let env = infer_types(&m).unwrap();
        assert!(check_model(&m, &env).is_err());
    }

    #[test]
    fn corpus_type_checks() {
        for src in crate::corpus::SOURCES {
            let (m, c) = parse_machine(src.1).unwrap();
            let model = Model::new(m, c).unwrap();
            TypedModel::new(model).unwrap_or_else(|e| panic!("{}: {e}", src.0));
        }
    }
}
