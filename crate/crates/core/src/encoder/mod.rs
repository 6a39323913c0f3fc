//! Translation of a typed Event-B model into an Alloy module: execution
//! scaffolding (State, Events, Initial, event predicates, EventTrigger),
//! the invariant assertion, and the check command.

mod expr;

use std::collections::{BTreeMap, BTreeSet};

pub use expr::{class_arrow, dom_of, power_chain, ran_of, truth, variable_path, EncodeContext, MAX_POWER_BITWIDTH};

use crate::alloy::{
    prelude, validate_module, AlloyExpr, AlloyModule, AssertDecl, BinaryOp, BlockItem, CheckCmd, Decl, FactDecl,
    FieldDecl, Mult, Paragraph, PredDecl, Quant, SigDecl, DEFAULT_BITWIDTH,
};
use crate::frontend::Event;
use crate::typing::{flatten_type, scalar_sig_name, SigSpec, TypeError, TypedModel};

pub const STATE: &str = "State";
pub const EVENTS: &str = "Events";
pub const UNDEF: &str = "Undef";
pub const EV_FIELD: &str = "Ev";
pub const CONSTS: &str = "Consts";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("the machine has no events, so its trigger fact would be empty")]
    NoEvents,
    #[error("event '{event}' has the same name as the enumeration of event '{other}'")]
    EventNameCollision { event: String, other: String },
    #[error("no scope given for carrier set '{0}'")]
    MissingScope(String),
    #[error("scope given for '{0}', which is not a carrier set")]
    UnknownScope(String),
    #[error("scope for '{0}' must be positive")]
    EmptyScope(String),
    #[error("at least 2 states are needed, got {0}")]
    TooFewStates(u32),
    #[error("bitwidth must be between 1 and 32, got {0}")]
    Bitwidth(u32),
    #[error("cannot encode '{expr}': {reason}")]
    Unsupported { expr: String, reason: String },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("generated module is malformed: {0}")]
    Malformed(String),
}

type R<T> = Result<T, EncodeError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    pub num_states: u32,
    pub bitwidth: u32,
    /// Exact atom count per carrier set.
    pub scopes: BTreeMap<String, u32>,
    /// Defaults to `<Machine>Invariants`.
    pub assertion_name: Option<String>,
}

impl EncodeOptions {
    pub fn new(num_states: u32, scopes: BTreeMap<String, u32>) -> Self {
        EncodeOptions {
            num_states,
            bitwidth: DEFAULT_BITWIDTH,
            scopes,
            assertion_name: None,
        }
    }

    fn check(&self) -> R<()> {
        if self.num_states < 2 {
            return Err(EncodeError::TooFewStates(self.num_states));
        }
        if !(1..=32).contains(&self.bitwidth) {
            return Err(EncodeError::Bitwidth(self.bitwidth));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Encoded {
    pub module: AlloyModule,
    pub warnings: Vec<String>,
}

/// Auxiliary signatures of every relational variable, innermost first,
/// variables in declaration order.
pub fn aux_sigs(tm: &TypedModel) -> Vec<SigSpec> {
    tm.model
        .machine()
        .variables
        .iter()
        .flat_map(|v| flatten_type(&tm.types.variables[&v.node], &v.node).sigs)
        .collect()
}

/// Name of the enumeration atom for an event.
pub fn event_enum_name(event: &str) -> String {
    format!("{event}E")
}

/// `abstract sig Events {}` and one `one sig` per event, plus `Undef`.
pub fn encode_events_enum(events: &[Event]) -> R<Vec<SigDecl>> {
    if events.is_empty() {
        return Err(EncodeError::NoEvents);
    }
    let names: BTreeSet<&str> = events.iter().map(|e| e.name.node.as_str()).collect();
    for e in events {
        let enum_name = event_enum_name(&e.name.node);
        if names.contains(enum_name.as_str()) {
            return Err(EncodeError::EventNameCollision {
                event: enum_name,
                other: e.name.node.clone(),
            });
        }
    }
    let parent = SigDecl {
        is_abstract: true,
        ..SigDecl::plain(EVENTS)
    };
    let mut members = vec![UNDEF.to_string()];
    members.extend(events.iter().map(|e| event_enum_name(&e.name.node)));
    let children = SigDecl {
        names: members,
        is_abstract: false,
        mult: Some(Mult::One),
        extends: Some(EVENTS.to_string()),
        fields: vec![],
    };
    Ok(vec![parent, children])
}

/// Signature of one auxiliary relation, `sig N { rel : L -> R }`.
pub fn encode_aux_sig(spec: &SigSpec) -> SigDecl {
    SigDecl {
        fields: vec![FieldDecl {
            name: spec.field_name.clone(),
            bound: AlloyExpr::product(AlloyExpr::name(&spec.left), AlloyExpr::name(&spec.right)),
        }],
        ..SigDecl::plain(&spec.name)
    }
}

/// Class constraint of an auxiliary relation, if its constructor is a
/// function class: `all x : N | x.rel in L m -> n R`.
pub fn encode_class_fact(spec: &SigSpec) -> Option<FactDecl> {
    if spec.side_facts.is_empty() {
        return None;
    }
    let class = crate::frontend::RelClass::ALL
        .into_iter()
        .find(|c| crate::typing::side_facts(*c) == spec.side_facts)
        .expect("side facts come from a class");
    let (left_mult, right_mult) = class_arrow(class);
    let body = AlloyExpr::binary(
        BinaryOp::In,
        AlloyExpr::path("x", &[&spec.field_name]),
        AlloyExpr::Product {
            left: Box::new(AlloyExpr::name(&spec.left)),
            left_mult,
            right_mult,
            right: Box::new(AlloyExpr::name(&spec.right)),
        },
    );
    Some(FactDecl {
        name: Some(format!("{}Class", spec.name)),
        body: AlloyExpr::Block(vec![BlockItem::Formula(AlloyExpr::Quant(
            Quant::All,
            vec![Decl::new(&["x"], AlloyExpr::name(&spec.name))],
            Box::new(body),
        ))]),
    })
}

/// `sig State { v : T, ..., Ev : Events }`.
pub fn encode_state_sig(tm: &TypedModel) -> SigDecl {
    let mut fields: Vec<FieldDecl> = tm
        .model
        .machine()
        .variables
        .iter()
        .map(|v| FieldDecl {
            name: v.node.clone(),
            bound: AlloyExpr::name(flatten_type(&tm.types.variables[&v.node], &v.node).field_type),
        })
        .collect();
    fields.push(FieldDecl {
        name: EV_FIELD.to_string(),
        bound: AlloyExpr::name(EVENTS),
    });
    SigDecl {
        fields,
        ..SigDecl::plain(STATE)
    }
}

fn assigned_path(tm: &TypedModel, state: &str, var: &str) -> AlloyExpr {
    variable_path(state, var, tm.types.variables[var].is_scalar())
}

fn ev_equation(state: &str, value: &str) -> AlloyExpr {
    AlloyExpr::eq(AlloyExpr::path(state, &[EV_FIELD]), AlloyExpr::name(value))
}

/// `fact Initial { let s0 = ord/first { ... s0.Ev = Undef } }`.
pub fn encode_init(tm: &TypedModel, bitwidth: u32) -> R<FactDecl> {
    let m = tm.model.machine();
    let mut ctx = EncodeContext::for_model(tm, None, bitwidth);
    let mut items = Vec::new();
    for v in &m.variables {
        let act = m
            .initialisation
            .iter()
            .find(|a| a.node.target.node == v.node)
            .ok_or_else(|| EncodeError::Malformed(format!("variable '{}' is not initialised", v.node)))?;
        let want = tm.types.variables[&v.node].value_ty();
        let value = ctx.encode_expr_as(&act.node.value, &want)?;
        items.push((act.pos, AlloyExpr::eq(assigned_path(tm, "s0", &v.node), value)));
    }
    items.sort_by_key(|(pos, _)| *pos);
    let mut block: Vec<BlockItem> = items.into_iter().map(|(_, f)| BlockItem::Formula(f)).collect();
    block.push(BlockItem::Formula(ev_equation("s0", UNDEF)));
    let body = AlloyExpr::Let(
        vec![("s0".to_string(), AlloyExpr::name("ord/first"))],
        Box::new(AlloyExpr::Block(block)),
    );
    Ok(FactDecl {
        name: Some("Initial".to_string()),
        body: AlloyExpr::Block(vec![BlockItem::Formula(body)]),
    })
}

/// `pred E[s, s' : State] { some params { guards, actions, frames, Ev } }`.
pub fn encode_event(tm: &TypedModel, index: usize, bitwidth: u32) -> R<PredDecl> {
    let m = tm.model.machine();
    let ev = &m.events[index];
    let mut ctx = EncodeContext::for_model(tm, Some("s"), bitwidth);
    let mut decls = Vec::new();
    for p in tm.model.params(index) {
        let t = crate::typing::type_of(&p.domain, ctx.scope())?;
        let dom = ctx.encode_expr_as(&p.domain, &t)?;
        decls.push(Decl::new(&[&p.name], dom));
        ctx.push_local(&p.name, t.elem().cloned().expect("parameter domains are sets"));
    }
    let mut items = Vec::new();
    let guards: Vec<_> = ev
        .guards
        .iter()
        .enumerate()
        .filter(|(gi, _)| !tm.model.is_param_guard(index, *gi))
        .collect();
    if !guards.is_empty() {
        items.push(BlockItem::Comment("Guards".to_string()));
        for (_, g) in guards {
            items.push(BlockItem::Formula(ctx.encode_pred(&g.node)?));
        }
    }
    items.push(BlockItem::Comment("Action".to_string()));
    for a in &ev.actions {
        let var = &a.node.target.node;
        let want = tm.types.variables[var].value_ty();
        let value = ctx.encode_expr_as(&a.node.value, &want)?;
        items.push(BlockItem::Formula(AlloyExpr::eq(assigned_path(tm, "s'", var), value)));
    }
    for v in &m.variables {
        if ev.actions.iter().all(|a| a.node.target.node != v.node) {
            items.push(BlockItem::Formula(AlloyExpr::eq(
                AlloyExpr::path("s'", &[&v.node]),
                AlloyExpr::path("s", &[&v.node]),
            )));
        }
    }
    items.push(BlockItem::Formula(ev_equation("s'", &event_enum_name(&ev.name.node))));
    let inner = AlloyExpr::Block(items);
    let body = if decls.is_empty() {
        inner
    } else {
        AlloyExpr::Block(vec![BlockItem::Formula(AlloyExpr::Quant(
            Quant::Some,
            decls,
            Box::new(inner),
        ))])
    };
    Ok(PredDecl {
        name: ev.name.node.clone(),
        params: vec![Decl::new(&["s", "s'"], AlloyExpr::name(STATE))],
        body,
    })
}

/// `fact EventTrigger`: every non-final state steps by some event.
pub fn encode_trigger(events: &[Event]) -> R<FactDecl> {
    let calls: Vec<AlloyExpr> = events
        .iter()
        .map(|e| AlloyExpr::call(&e.name.node, vec![AlloyExpr::name("s"), AlloyExpr::name("s'")]))
        .collect();
    let disjunction = AlloyExpr::fold(BinaryOp::Or, calls).ok_or(EncodeError::NoEvents)?;
    let body = AlloyExpr::Quant(
        Quant::All,
        vec![Decl::new(
            &["s"],
            AlloyExpr::binary(BinaryOp::Diff, AlloyExpr::name(STATE), AlloyExpr::name("ord/last")),
        )],
        Box::new(AlloyExpr::Block(vec![BlockItem::Formula(AlloyExpr::Let(
            vec![(
                "s'".to_string(),
                AlloyExpr::call("ord/next", vec![AlloyExpr::name("s")]),
            )],
            Box::new(AlloyExpr::Block(vec![BlockItem::Formula(disjunction)])),
        ))])),
    );
    Ok(FactDecl {
        name: Some("EventTrigger".to_string()),
        body: AlloyExpr::Block(vec![BlockItem::Formula(body)]),
    })
}

/// Conjunction of the non-typing invariants over every state. Returns the
/// assertion and any warning.
pub fn encode_invariants(tm: &TypedModel, name: &str, bitwidth: u32) -> R<(AssertDecl, Option<String>)> {
    let mut ctx = EncodeContext::for_model(tm, Some("s"), bitwidth);
    let mut parts = Vec::new();
    for (i, inv) in tm.model.machine().invariants.iter().enumerate() {
        if tm.types.is_typing_invariant(i) {
            continue;
        }
        parts.push(ctx.encode_pred(&inv.node)?);
    }
    let warning = parts
        .is_empty()
        .then(|| format!("assertion {name} has no invariants to check and holds trivially"));
    let body = AlloyExpr::fold(BinaryOp::And, parts).unwrap_or_else(truth);
    let all = AlloyExpr::Quant(
        Quant::All,
        vec![Decl::new(&["s"], AlloyExpr::name(STATE))],
        Box::new(body),
    );
    Ok((
        AssertDecl {
            name: name.to_string(),
            body: AlloyExpr::Block(vec![BlockItem::Formula(all)]),
        },
        warning,
    ))
}

/// Exact bounds: State and every auxiliary signature get the state count,
/// carrier sets their scope.
pub fn emit_check(tm: &TypedModel, options: &EncodeOptions, assertion: &str) -> R<CheckCmd> {
    let carriers: Vec<&str> = tm
        .model
        .context()
        .carrier_sets
        .iter()
        .map(|s| s.node.as_str())
        .collect();
    for name in options.scopes.keys() {
        if !carriers.contains(&name.as_str()) {
            return Err(EncodeError::UnknownScope(name.clone()));
        }
    }
    let mut bounds = vec![(STATE.to_string(), options.num_states)];
    for c in carriers {
        match options.scopes.get(c) {
            None => return Err(EncodeError::MissingScope(c.to_string())),
            Some(0) => return Err(EncodeError::EmptyScope(c.to_string())),
            Some(&k) => bounds.push((c.to_string(), k)),
        }
    }
    for s in aux_sigs(tm) {
        bounds.push((s.name, options.num_states));
    }
    Ok(CheckCmd {
        assertion: assertion.to_string(),
        bounds,
        bitwidth: options.bitwidth,
    })
}

fn encode_context_sigs(tm: &TypedModel, out: &mut Vec<Paragraph>) {
    let ctx = tm.model.context();
    for s in &ctx.carrier_sets {
        out.push(Paragraph::Sig(SigDecl::plain(&s.node)));
    }
    for e in &ctx.enumerated_sets {
        out.push(Paragraph::Sig(SigDecl {
            is_abstract: true,
            ..SigDecl::plain(&e.name.node)
        }));
        out.push(Paragraph::Sig(SigDecl {
            names: e.members.iter().map(|m| m.node.clone()).collect(),
            is_abstract: false,
            mult: Some(Mult::One),
            extends: Some(e.name.node.clone()),
            fields: vec![],
        }));
    }
}

fn encode_constants(tm: &TypedModel, bitwidth: u32, out: &mut Vec<Paragraph>) -> R<()> {
    let ctx = tm.model.context();
    if ctx.constants.is_empty() {
        return Ok(());
    }
    let fields = ctx
        .constants
        .iter()
        .map(|c| FieldDecl {
            name: c.node.clone(),
            bound: AlloyExpr::name(scalar_sig_name(&tm.types.constants[&c.node])),
        })
        .collect();
    out.push(Paragraph::Sig(SigDecl {
        mult: Some(Mult::One),
        fields,
        ..SigDecl::plain(CONSTS)
    }));
    let mut ectx = EncodeContext::for_model(tm, None, bitwidth);
    let mut items = Vec::new();
    for (i, ax) in ctx.axioms.iter().enumerate() {
        if !tm.types.is_typing_axiom(i) {
            items.push(BlockItem::Formula(ectx.encode_pred(&ax.node)?));
        }
    }
    if !items.is_empty() {
        out.push(Paragraph::Fact(FactDecl {
            name: Some("Axioms".to_string()),
            body: AlloyExpr::Block(items),
        }));
    }
    Ok(())
}

/// Full translation. The result passes `validate_module`.
pub fn encode(tm: &TypedModel, options: &EncodeOptions) -> R<Encoded> {
    options.check()?;
    let m = tm.model.machine();
    let bw = options.bitwidth;
    let mut module = AlloyModule::new(&m.name.node);
    let mut warnings = Vec::new();
    let p = &mut module.paragraphs;

    p.extend(prelude().into_iter().map(Paragraph::Fun));
    encode_context_sigs(tm, p);
    encode_constants(tm, bw, p)?;
    p.extend(encode_events_enum(&m.events)?.into_iter().map(Paragraph::Sig));
    for spec in aux_sigs(tm) {
        p.push(Paragraph::Sig(encode_aux_sig(&spec)));
        p.extend(encode_class_fact(&spec).map(Paragraph::Fact));
    }
    p.push(Paragraph::Sig(encode_state_sig(tm)));
    p.push(Paragraph::Fact(encode_init(tm, bw)?));
    for i in 0..m.events.len() {
        p.push(Paragraph::Pred(encode_event(tm, i, bw)?));
    }
    p.push(Paragraph::Fact(encode_trigger(&m.events)?));

    let name = options
        .assertion_name
        .clone()
        .unwrap_or_else(|| format!("{}Invariants", m.name.node));
    if !m.variables.is_empty() {
        p.push(Paragraph::Comment(
            "Typing invariants hold by construction: field declarations and class facts.".to_string(),
        ));
    }
    let (assertion, warning) = encode_invariants(tm, &name, bw)?;
    warnings.extend(warning);
    p.push(Paragraph::Assert(assertion));
    p.push(Paragraph::Check(emit_check(tm, options, &name)?));

    let diags = validate_module(&module);
    if let Some(d) = diags.first() {
        return Err(EncodeError::Malformed(d.message.clone()));
    }
    Ok(Encoded { module, warnings })
}

#[cfg(test)]
mod tests;
