//! Event-B surface syntax: abstract syntax, parser, printer, and
//! well-formedness checks.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

pub use ast::*;
pub use parser::{parse_context, parse_expression, parse_machine, parse_predicate, parse_source, SourceFile};
pub use printer::{print_context, print_machine};

/// Syntax error with its source position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    DuplicateDeclaration,
    ReservedName,
    UnknownIdentifier,
    UnknownContext,
    UnknownTarget,
    DuplicateAssignment,
    MissingInitialisation,
    InitialisationReadsVariable,
    Shadowing,
    UnboundedQuantifier,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

/// Names the translation relies on, plus target-language keywords. Declared
/// identifiers may not use them.
pub const RESERVED_NAMES: &[&str] = &[
    // encoding
    "State",
    "Events",
    "Undef",
    "Ev",
    "rel",
    "s",
    "s0",
    "ord",
    "Consts",
    "Initial",
    "EventTrigger",
    "Axioms",
    "domSub",
    "ranSub",
    "plus",
    "minus",
    "mul",
    "div",
    "rem",
    "INT",
    // target language
    "abstract",
    "all",
    "and",
    "as",
    "assert",
    "but",
    "check",
    "disj",
    "else",
    "enum",
    "exactly",
    "expect",
    "extends",
    "fact",
    "for",
    "fun",
    "iden",
    "iff",
    "implies",
    "in",
    "Int",
    "int",
    "let",
    "lone",
    "module",
    "no",
    "none",
    "one",
    "open",
    "pred",
    "private",
    "run",
    "seq",
    "set",
    "sig",
    "some",
    "String",
    "sum",
    "this",
    "univ",
    "var",
];

const RESERVED_EVENT_NAMES: &[&str] = &["Undef", "Initialisation"];

/// What a global identifier denotes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symbol {
    CarrierSet,
    EnumSet,
    EnumMember { set: String, index: u32 },
    Constant(usize),
    Variable(usize),
    Integers,
}

/// A machine together with the context it sees, checked for
/// well-formedness. Every downstream stage takes one of these.
#[derive(Clone, Debug)]
pub struct Model {
    machine: Machine,
    context: Context,
    params: Vec<Vec<Param>>,
    symbols: BTreeMap<String, Symbol>,
}

impl Model {
    /// Validates and bundles. `context` is the context named by `SEES`.
    pub fn new(machine: Machine, context: Option<Context>) -> Result<Model, Vec<Diagnostic>> {
        let diags = validate(&machine, context.as_ref());
        if !diags.is_empty() {
            return Err(diags);
        }
        let context = context.unwrap_or_default();
        let symbols = symbol_table(&machine, &context);
        let params = machine
            .events
            .iter()
            .map(|ev| event_params(ev, |n| symbols.contains_key(n)))
            .collect();
        Ok(Model {
            machine,
            context,
            params,
            symbols,
        })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn params(&self, event_index: usize) -> &[Param] {
        &self.params[event_index]
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn symbols(&self) -> &BTreeMap<String, Symbol> {
        &self.symbols
    }

    /// True for guards that only introduce a parameter.
    pub fn is_param_guard(&self, event_index: usize, guard_index: usize) -> bool {
        self.params[event_index].iter().any(|p| p.guard_index == guard_index)
    }
}

fn symbol_table(machine: &Machine, ctx: &Context) -> BTreeMap<String, Symbol> {
    let mut t = BTreeMap::new();
    t.insert("INT".to_string(), Symbol::Integers);
    for s in &ctx.carrier_sets {
        t.insert(s.node.clone(), Symbol::CarrierSet);
    }
    for e in &ctx.enumerated_sets {
        t.insert(e.name.node.clone(), Symbol::EnumSet);
        for (i, m) in e.members.iter().enumerate() {
            t.insert(
                m.node.clone(),
                Symbol::EnumMember {
                    set: e.name.node.clone(),
                    index: i as u32,
                },
            );
        }
    }
    for (i, c) in ctx.constants.iter().enumerate() {
        t.insert(c.node.clone(), Symbol::Constant(i));
    }
    for (i, v) in machine.variables.iter().enumerate() {
        t.insert(v.node.clone(), Symbol::Variable(i));
    }
    t
}

/// Parameters of an event: each guard `x : E` on an identifier that is
/// neither global nor an earlier parameter introduces `x` with domain `E`.
pub fn event_params(event: &Event, is_global: impl Fn(&str) -> bool) -> Vec<Param> {
    let mut params: Vec<Param> = Vec::new();
    for (i, g) in event.guards.iter().enumerate() {
        if let Some((x, dom)) = g.node.as_membership() {
            if !is_global(x) && !params.iter().any(|p| p.name == x) {
                params.push(Param {
                    name: x.to_string(),
                    domain: dom.clone(),
                    guard_index: i,
                });
            }
        }
    }
    params
}

/// Domains of quantified variables, read from the leading membership
/// conjuncts: the antecedent of a universal, the body of an existential.
/// Returns the first variable without a domain on failure.
pub fn quantifier_domains<'a>(vars: &'a [String], body: &'a Pred, universal: bool) -> Result<Vec<&'a Expr>, &'a str> {
    let guard = if universal {
        match body {
            Pred::Implies(ante, _) => Some(&**ante),
            _ => None,
        }
    } else {
        Some(body)
    };
    let conjuncts = guard.map(Pred::conjuncts).unwrap_or_default();
    let mut out = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let dom = conjuncts.iter().find_map(|c| match c.as_membership() {
            Some((x, e)) if x == v => {
                let mut later = false;
                e.for_each_ident(&mut |n| later |= vars[i..].iter().any(|w| w == n));
                (!later).then_some(e)
            }
            _ => None,
        });
        match dom {
            Some(e) => out.push(e),
            None => return Err(v),
        }
    }
    Ok(out)
}

struct Validator<'a> {
    diags: Vec<Diagnostic>,
    globals: HashSet<&'a str>,
    variables: HashSet<&'a str>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    Axiom,
    Initialisation,
    Machine,
}

impl<'a> Validator<'a> {
    fn report(&mut self, pos: Pos, kind: DiagnosticKind, message: String) {
        self.diags.push(Diagnostic { pos, kind, message });
    }

    fn declare(&mut self, id: &'a Ident, what: &str) {
        if RESERVED_NAMES.contains(&id.node.as_str()) {
            self.report(
                id.pos,
                DiagnosticKind::ReservedName,
                format!("{what} name '{}' is reserved", id.node),
            );
        }
        if self.variables.contains(id.node.as_str()) || !self.globals.insert(&id.node) {
            self.report(
                id.pos,
                DiagnosticKind::DuplicateDeclaration,
                format!("duplicate declaration of '{}'", id.node),
            );
        }
    }

    fn check_expr(&mut self, e: &Expr, locals: &[&str], pos: Pos, region: Region) {
        let mut seen = Vec::new();
        e.for_each_ident(&mut |n| seen.push(n.to_string()));
        for n in seen {
            if locals.contains(&n.as_str()) {
                continue;
            }
            if self.variables.contains(n.as_str()) {
                match region {
                    Region::Axiom => self.report(
                        pos,
                        DiagnosticKind::UnknownIdentifier,
                        format!("axiom refers to machine variable '{n}'"),
                    ),
                    Region::Initialisation => self.report(
                        pos,
                        DiagnosticKind::InitialisationReadsVariable,
                        format!("initialisation reads variable '{n}'"),
                    ),
                    Region::Machine => {}
                }
                continue;
            }
            if !self.globals.contains(n.as_str()) && n != "INT" {
                self.report(
                    pos,
                    DiagnosticKind::UnknownIdentifier,
                    format!("unknown identifier '{n}'"),
                );
            }
        }
    }

    fn check_pred(&mut self, p: &Pred, locals: &mut Vec<String>, pos: Pos, region: Region) {
        match p {
            Pred::Cmp(_, a, b) => {
                let l: Vec<&str> = locals.iter().map(String::as_str).collect();
                self.check_expr(a, &l, pos, region);
                self.check_expr(b, &l, pos, region);
            }
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                self.check_pred(a, locals, pos, region);
                self.check_pred(b, locals, pos, region);
            }
            Pred::Not(a) => self.check_pred(a, locals, pos, region),
            Pred::Forall(vars, body) | Pred::Exists(vars, body) => {
                let universal = matches!(p, Pred::Forall(..));
                for v in vars {
                    if RESERVED_NAMES.contains(&v.as_str()) {
                        self.report(
                            pos,
                            DiagnosticKind::ReservedName,
                            format!("bound variable name '{v}' is reserved"),
                        );
                    }
                    if self.globals.contains(v.as_str()) || self.variables.contains(v.as_str()) || locals.contains(v) {
                        self.report(
                            pos,
                            DiagnosticKind::Shadowing,
                            format!("bound variable '{v}' shadows an identifier in scope"),
                        );
                    }
                }
                if vars.iter().collect::<HashSet<_>>().len() != vars.len() {
                    self.report(
                        pos,
                        DiagnosticKind::DuplicateDeclaration,
                        "quantifier binds the same variable twice".to_string(),
                    );
                }
                if let Err(v) = quantifier_domains(vars, body, universal) {
                    let shape = if universal { "x : S => ..." } else { "x : S & ..." };
                    self.report(
                        pos,
                        DiagnosticKind::UnboundedQuantifier,
                        format!("bound variable '{v}' needs a leading membership ({shape})"),
                    );
                }
                let depth = locals.len();
                locals.extend(vars.iter().cloned());
                self.check_pred(body, locals, pos, region);
                locals.truncate(depth);
            }
        }
    }
}

/// Checks well-formedness. Diagnostics come back ordered by source position;
/// an empty list means the machine may be translated.
pub fn validate(machine: &Machine, context: Option<&Context>) -> Vec<Diagnostic> {
    let mut v = Validator {
        diags: Vec::new(),
        globals: HashSet::new(),
        variables: HashSet::new(),
    };

    match (&machine.sees, context) {
        (Some(name), Some(ctx)) if name.node != ctx.name.node => v.report(
            name.pos,
            DiagnosticKind::UnknownContext,
            format!(
                "machine sees '{}' but context '{}' was supplied",
                name.node, ctx.name.node
            ),
        ),
        (Some(name), None) => v.report(
            name.pos,
            DiagnosticKind::UnknownContext,
            format!("context '{}' not found", name.node),
        ),
        _ => {}
    }

    if let Some(ctx) = context {
        for s in &ctx.carrier_sets {
            v.declare(s, "set");
        }
        for e in &ctx.enumerated_sets {
            v.declare(&e.name, "set");
            for m in &e.members {
                v.declare(m, "enumeration member");
            }
        }
        for c in &ctx.constants {
            v.declare(c, "constant");
        }
    }
    for var in &machine.variables {
        if RESERVED_NAMES.contains(&var.node.as_str()) {
            v.report(
                var.pos,
                DiagnosticKind::ReservedName,
                format!("variable name '{}' is reserved", var.node),
            );
        }
        if v.globals.contains(var.node.as_str()) || !v.variables.insert(&var.node) {
            v.report(
                var.pos,
                DiagnosticKind::DuplicateDeclaration,
                format!("duplicate declaration of '{}'", var.node),
            );
        }
    }
    // Event names share the namespace for clashes but are not in scope.
    let mut event_names: HashSet<&str> = HashSet::new();
    for ev in &machine.events {
        let name = ev.name.node.as_str();
        if RESERVED_EVENT_NAMES.contains(&name) || RESERVED_NAMES.contains(&name) {
            v.report(
                ev.name.pos,
                DiagnosticKind::ReservedName,
                format!("event name '{name}' is reserved"),
            );
        }
        if v.globals.contains(name) || v.variables.contains(name) || !event_names.insert(name) {
            v.report(
                ev.name.pos,
                DiagnosticKind::DuplicateDeclaration,
                format!("duplicate declaration of '{name}'"),
            );
        }
    }
    if let Some(ctx) = context {
        for ax in &ctx.axioms {
            v.check_pred(&ax.node, &mut Vec::new(), ax.pos, Region::Axiom);
        }
    }
    for inv in &machine.invariants {
        v.check_pred(&inv.node, &mut Vec::new(), inv.pos, Region::Machine);
    }

    let mut assigned: HashSet<&str> = HashSet::new();
    for act in &machine.initialisation {
        let target = &act.node.target;
        if !v.variables.contains(target.node.as_str()) {
            v.report(
                target.pos,
                DiagnosticKind::UnknownTarget,
                format!("'{}' is not a machine variable", target.node),
            );
        } else if !assigned.insert(&target.node) {
            v.report(
                target.pos,
                DiagnosticKind::DuplicateAssignment,
                format!("initialisation assigns '{}' more than once", target.node),
            );
        }
        v.check_expr(&act.node.value, &[], act.pos, Region::Initialisation);
    }
    for var in &machine.variables {
        if !assigned.contains(var.node.as_str()) {
            v.report(
                var.pos,
                DiagnosticKind::MissingInitialisation,
                format!("initialisation does not assign '{}'", var.node),
            );
        }
    }

    for ev in &machine.events {
        let mut locals: Vec<String> = Vec::new();
        for g in &ev.guards {
            if let Some((x, dom)) = g.node.as_membership() {
                let fresh =
                    !v.globals.contains(x) && !v.variables.contains(x) && x != "INT" && !locals.iter().any(|l| l == x);
                if fresh {
                    let l: Vec<&str> = locals.iter().map(String::as_str).collect();
                    v.check_expr(dom, &l, g.pos, Region::Machine);
                    if RESERVED_NAMES.contains(&x) {
                        v.report(
                            g.pos,
                            DiagnosticKind::ReservedName,
                            format!("parameter name '{x}' is reserved"),
                        );
                    }
                    locals.push(x.to_string());
                    continue;
                }
            }
            v.check_pred(&g.node, &mut locals, g.pos, Region::Machine);
        }
        let mut targets: HashSet<&str> = HashSet::new();
        let l: Vec<&str> = locals.iter().map(String::as_str).collect();
        for act in &ev.actions {
            let target = &act.node.target;
            if !v.variables.contains(target.node.as_str()) {
                v.report(
                    target.pos,
                    DiagnosticKind::UnknownTarget,
                    format!("'{}' is not a machine variable", target.node),
                );
            } else if !targets.insert(&target.node) {
                v.report(
                    target.pos,
                    DiagnosticKind::DuplicateAssignment,
                    format!("event '{}' assigns '{}' more than once", ev.name.node, target.node),
                );
            }
            v.check_expr(&act.node.value, &l, act.pos, Region::Machine);
        }
    }

    let mut diags = v.diags;
    diags.sort_by_key(|d| d.pos);
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    const MUTEX: &str = include_str!("../../corpus/mutex.ebm");

    fn load(src: &str) -> (Machine, Option<Context>) {
        parse_machine(src).unwrap()
    }

    fn kinds(src: &str) -> Vec<DiagnosticKind> {
        let (m, c) = load(src);
        validate(&m, c.as_ref()).into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn mutex_machine_shape_and_validity() {
        let (m, c) = load(MUTEX);
        assert_eq!(m.events.len(), 3);
        assert_eq!(m.variables.len(), 2);
        assert_eq!(m.invariants.len(), 3);
        assert_eq!(
            m.invariants[2].node,
            Pred::cmp(
                CmpOp::Neq,
                Expr::unary(UnOp::Dom, Expr::ident("Waits")),
                Expr::ident("Process")
            )
        );
        assert!(validate(&m, c.as_ref()).is_empty());
        let model = Model::new(m, c).unwrap();
        let names: Vec<&str> = model.params(0).iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["p", "m"]);
        assert!(model.is_param_guard(0, 1) && !model.is_param_guard(0, 2));
    }

    #[test]
    fn duplicate_assignment_in_event() {
        let src = "MACHINE M VARIABLES x INVARIANTS x : INT INITIALISATION x := 0
            EVENT E ACTIONS x := 1 x := 2 END END";
        assert_eq!(kinds(src), [DiagnosticKind::DuplicateAssignment]);
    }

    #[test]
    fn reserved_event_name() {
        let src = "MACHINE M EVENT Undef END END";
        assert_eq!(kinds(src), [DiagnosticKind::ReservedName]);
        let src = "MACHINE M EVENT Initialisation END END";
        assert_eq!(kinds(src), [DiagnosticKind::ReservedName]);
    }

    #[test]
    fn empty_machine_is_valid() {
        assert!(kinds("MACHINE M END").is_empty());
    }

    #[test]
    fn unknown_identifiers_and_init_rules() {
        let src = "MACHINE M VARIABLES x y INVARIANTS x : INT y : INT
            INITIALISATION x := 0 y := x
            EVENT E GUARDS z > 0 ACTIONS w := 1 END END";
        assert_eq!(
            kinds(src),
            [
                DiagnosticKind::InitialisationReadsVariable,
                DiagnosticKind::UnknownIdentifier,
                DiagnosticKind::UnknownTarget
            ]
        );
        let src = "MACHINE M VARIABLES x INVARIANTS x : INT END";
        assert_eq!(kinds(src), [DiagnosticKind::MissingInitialisation]);
    }

    #[test]
    fn quantifier_rules() {
        let src = "CONTEXT C SETS S END MACHINE M SEES C VARIABLES x
            INVARIANTS x : S  forall x . x : S => x = x  forall y . y = y
            INITIALISATION x := x END";
        let (m, c) = load(src);
        let d = validate(&m, c.as_ref());
        let k: Vec<_> = d.iter().map(|d| d.kind).collect();
        assert!(k.contains(&DiagnosticKind::Shadowing));
        assert!(k.contains(&DiagnosticKind::UnboundedQuantifier));
        assert!(d.windows(2).all(|w| w[0].pos <= w[1].pos));
    }

    #[test]
    fn duplicate_and_context_errors() {
        let src = "CONTEXT C SETS S S END MACHINE M SEES D END";
        let k = kinds(src);
        assert!(k.contains(&DiagnosticKind::DuplicateDeclaration));
        assert!(k.contains(&DiagnosticKind::UnknownContext));
    }

    #[test]
    fn quantifier_domain_extraction() {
        let p = parse_predicate("forall x, y . x : S & y : T & x = y => x = y").unwrap();
        if let Pred::Forall(vars, body) = &p {
            let d = quantifier_domains(vars, body, true).unwrap();
            assert_eq!(d, [&Expr::ident("S"), &Expr::ident("T")]);
        } else {
            unreachable!()
        }
        let p = parse_predicate("exists x . x : dom(r) & x /= c").unwrap();
        if let Pred::Exists(vars, body) = &p {
            assert!(quantifier_domains(vars, body, false).is_ok());
            assert!(quantifier_domains(vars, body, true).is_err());
        }
    }
}
