//! Explicit-state bounded model checking of Event-B machines over finite
//! scopes: breadth-first search from the initial states, invariants checked
//! at every reached state.

mod eval;
mod instance;
mod report;

use std::collections::{BTreeMap, HashMap};

pub use eval::{
    carrier_values, eval_expr, eval_pred, inhabits, int_values, member_of, satisfies_class, wrapped_pow, Env, EvalError,
};
pub use instance::{instance_for_states, ALLOY_STATE};
pub use report::{format_trace, value_json, ScopeReport, StepReport, TraceFormat, TraceReport};

use crate::frontend::{Pos, Symbol};
use crate::typing::{TypeTerm, TypedModel};
use crate::value::{Elem, Value};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Finite bounds for a check: atoms per carrier set, transitions, and the
/// integer bitwidth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    pub sets: BTreeMap<String, u32>,
    pub depth: u32,
    pub bitwidth: u32,
}

impl Scope {
    pub fn new(sets: BTreeMap<String, u32>, depth: u32) -> Self {
        Scope {
            sets,
            depth,
            bitwidth: crate::alloy::DEFAULT_BITWIDTH,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("no scope given for carrier set '{0}'")]
    MissingScope(String),
    #[error("scope given for '{0}', which is not a carrier set")]
    UnknownScope(String),
    #[error("scope for '{0}' must be positive")]
    EmptyScope(String),
    #[error("bitwidth must be between 1 and 32, got {0}")]
    Bitwidth(u32),
    #[error("{pos}: {source}")]
    Eval { pos: Pos, source: EvalError },
    #[error("{pos}: value {value} of '{variable}' is outside its type {ty}")]
    OutOfType {
        pos: Pos,
        variable: String,
        value: String,
        ty: String,
    },
    #[error("the axioms have no solution within the scope")]
    NoConstants,
    #[error("explored more than {0} states")]
    NodeBudget(usize),
}

type R<T> = Result<T, CheckError>;

/// Values of the machine variables, by name.
pub type ConcreteState = BTreeMap<String, Value>;

/// Event parameters in declaration order.
pub type Binding = Vec<(String, Value)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub event: String,
    pub params: Binding,
    pub state: ConcreteState,
}

/// A run from an initial state. The first step has the pseudo-event
/// `Undef`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub constants: BTreeMap<String, Value>,
    pub steps: Vec<Step>,
}

impl Trace {
    /// Number of transitions.
    pub fn depth(&self) -> usize {
        self.steps.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    NoViolationWithinDepth(u32),
    Violation { trace: Trace, invariant: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Distinct states reached.
    pub states: usize,
    /// Successor states computed, duplicates included.
    pub transitions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub stats: Stats,
}

/// The values every expression can refer to besides variables: sets,
/// enumeration members, INT, and one valuation of the constants.
#[derive(Clone, Debug)]
pub struct World {
    pub bitwidth: u32,
    /// Carrier and enumerated sets.
    pub sets: BTreeMap<String, Value>,
    pub constants: BTreeMap<String, Value>,
    base: Env,
}

impl World {
    pub fn env(&self) -> Env {
        self.base.clone()
    }

    /// Environment with the variables of `state` bound.
    pub fn state_env(&self, state: &ConcreteState) -> Env {
        let mut env = self.base.clone();
        for (k, v) in state {
            env.bind(k, v.clone());
        }
        env
    }
}

fn check_scope(tm: &TypedModel, scope: &Scope) -> R<()> {
    if !(1..=32).contains(&scope.bitwidth) {
        return Err(CheckError::Bitwidth(scope.bitwidth));
    }
    let carriers: Vec<&str> = tm
        .model
        .context()
        .carrier_sets
        .iter()
        .map(|s| s.node.as_str())
        .collect();
    for k in scope.sets.keys() {
        if !carriers.contains(&k.as_str()) {
            return Err(CheckError::UnknownScope(k.clone()));
        }
    }
    for c in carriers {
        match scope.sets.get(c) {
            None => return Err(CheckError::MissingScope(c.to_string())),
            Some(0) => return Err(CheckError::EmptyScope(c.to_string())),
            Some(_) => {}
        }
    }
    Ok(())
}

fn scalar_values(t: &TypeTerm, sets: &BTreeMap<String, Value>, bitwidth: u32) -> Vec<Value> {
    match t {
        TypeTerm::Given(s) => sets[s].as_set().expect("sets are sets").iter().cloned().collect(),
        TypeTerm::Integer => int_values(bitwidth)
            .as_set()
            .expect("INT is a set")
            .iter()
            .cloned()
            .collect(),
        TypeTerm::Rel(..) => unreachable!("constants are scalar"),
    }
}

/// Every valuation of the constants that satisfies the axioms, in
/// lexicographic order.
pub fn worlds(tm: &TypedModel, scope: &Scope) -> R<Vec<World>> {
    check_scope(tm, scope)?;
    let ctx = tm.model.context();
    let bw = scope.bitwidth;
    let mut base = Env::new(bw);
    let mut sets = BTreeMap::new();
    for s in &ctx.carrier_sets {
        sets.insert(s.node.clone(), carrier_values(&s.node, scope.sets[&s.node]));
    }
    for e in &ctx.enumerated_sets {
        let members: Vec<Value> = e
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| Value::Elem(Elem::new(&e.name.node, i as u32, &m.node)))
            .collect();
        for (m, v) in e.members.iter().zip(&members) {
            base.bind(&m.node, v.clone());
        }
        sets.insert(e.name.node.clone(), Value::Set(members.into_iter().collect()));
    }
    for (k, v) in &sets {
        base.bind(k, v.clone());
    }
    if matches!(tm.model.lookup("INT"), Some(Symbol::Integers)) {
        base.bind("INT", int_values(bw));
    }

    let names: Vec<&str> = ctx.constants.iter().map(|c| c.node.as_str()).collect();
    let domains: Vec<Vec<Value>> = names
        .iter()
        .map(|c| scalar_values(&tm.types.constants[*c], &sets, bw))
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; names.len()];
    if domains.iter().any(Vec::is_empty) {
        return Err(CheckError::NoConstants);
    }
    loop {
        let mut env = base.clone();
        let mut constants = BTreeMap::new();
        for (i, c) in names.iter().enumerate() {
            let v = domains[i][choice[i]].clone();
            env.bind(c, v.clone());
            constants.insert(c.to_string(), v);
        }
        let mut ok = true;
        for (i, ax) in ctx.axioms.iter().enumerate() {
            if tm.types.is_typing_axiom(i) {
                continue;
            }
            if !eval_pred(&ax.node, &mut env).map_err(|source| CheckError::Eval { pos: ax.pos, source })? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(World {
                bitwidth: bw,
                sets: sets.clone(),
                constants,
                base: env,
            });
        }
        // Odometer over the constant domains, last constant fastest.
        let mut k = names.len();
        loop {
            if k == 0 {
                return if out.is_empty() {
                    Err(CheckError::NoConstants)
                } else {
                    Ok(out)
                };
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < domains[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn assign(tm: &TypedModel, world: &World, var: &str, v: Value, pos: Pos) -> R<Value> {
    let t = &tm.types.variables[var];
    if !inhabits(&v, t, &world.sets) {
        return Err(CheckError::OutOfType {
            pos,
            variable: var.to_string(),
            value: v.to_string(),
            ty: t.to_string(),
        });
    }
    Ok(v)
}

/// The state produced by the initialisation under `world`.
pub fn initial_state(tm: &TypedModel, world: &World) -> R<ConcreteState> {
    let env = world.env();
    let mut state = ConcreteState::new();
    for a in &tm.model.machine().initialisation {
        let var = &a.node.target.node;
        let v = eval_expr(&a.node.value, &env).map_err(|source| CheckError::Eval { pos: a.pos, source })?;
        state.insert(var.clone(), assign(tm, world, var, v, a.pos)?);
    }
    Ok(state)
}

/// Parameter bindings of event `index` in lexicographic order, with the
/// guards evaluated. Returns every binding of the parameter domains and
/// whether all guards hold for it.
pub fn bindings(tm: &TypedModel, world: &World, state: &ConcreteState, index: usize) -> R<Vec<(Binding, bool)>> {
    let ev = &tm.model.machine().events[index];
    let params = tm.model.params(index);
    let mut env = world.state_env(state);
    let mut out = Vec::new();
    fn go(
        tm: &TypedModel,
        index: usize,
        k: usize,
        env: &mut Env,
        current: &mut Binding,
        out: &mut Vec<(Binding, bool)>,
    ) -> R<()> {
        let ev = &tm.model.machine().events[index];
        let params = tm.model.params(index);
        if k == params.len() {
            let mut ok = true;
            for (gi, g) in ev.guards.iter().enumerate() {
                if tm.model.is_param_guard(index, gi) {
                    continue;
                }
                if !eval_pred(&g.node, env).map_err(|source| CheckError::Eval { pos: g.pos, source })? {
                    ok = false;
                    break;
                }
            }
            out.push((current.clone(), ok));
            return Ok(());
        }
        let p = &params[k];
        let pos = ev.guards[p.guard_index].pos;
        let dom = eval_expr(&p.domain, env).map_err(|source| CheckError::Eval { pos, source })?;
        let members = dom.as_set().cloned().unwrap_or_default();
        for x in members {
            env.push(&p.name, x.clone());
            current.push((p.name.clone(), x));
            let r = go(tm, index, k + 1, env, current, out);
            current.pop();
            env.truncate(env.depth() - 1);
            r?;
        }
        Ok(())
    }
    let _ = (ev, params);
    go(tm, index, 0, &mut env, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// Applies the actions of event `index` under `binding`, ignoring guards.
/// All right-hand sides read the pre-state.
pub fn apply_event(
    tm: &TypedModel,
    world: &World,
    state: &ConcreteState,
    index: usize,
    binding: &Binding,
) -> R<ConcreteState> {
    let mut env = world.state_env(state);
    for (n, v) in binding {
        env.push(n, v.clone());
    }
    let mut next = state.clone();
    for a in &tm.model.machine().events[index].actions {
        let var = &a.node.target.node;
        let v = eval_expr(&a.node.value, &env).map_err(|source| CheckError::Eval { pos: a.pos, source })?;
        next.insert(var.clone(), assign(tm, world, var, v, a.pos)?);
    }
    Ok(next)
}

/// Enabled transitions: events in declaration order, then bindings in
/// lexicographic order.
pub fn successors(tm: &TypedModel, world: &World, state: &ConcreteState) -> R<Vec<(usize, Binding, ConcreteState)>> {
    let mut out = Vec::new();
    for i in 0..tm.model.machine().events.len() {
        for (b, enabled) in bindings(tm, world, state, i)? {
            if enabled {
                let next = apply_event(tm, world, state, i, &b)?;
                out.push((i, b, next));
            }
        }
    }
    Ok(out)
}

/// Index of the first invariant `state` violates.
pub fn violated_invariant(tm: &TypedModel, world: &World, state: &ConcreteState) -> R<Option<usize>> {
    let mut env = world.state_env(state);
    for (i, inv) in tm.model.machine().invariants.iter().enumerate() {
        if !eval_pred(&inv.node, &mut env).map_err(|source| CheckError::Eval { pos: inv.pos, source })? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

struct Node {
    world: usize,
    state: ConcreteState,
    parent: Option<(usize, usize, Binding)>,
    depth: u32,
}

fn rebuild(tm: &TypedModel, worlds: &[World], nodes: &[Node], mut at: usize) -> Trace {
    let events = &tm.model.machine().events;
    let mut steps = Vec::new();
    loop {
        let n = &nodes[at];
        match &n.parent {
            Some((p, ev, b)) => {
                steps.push(Step {
                    event: events[*ev].name.node.clone(),
                    params: b.clone(),
                    state: n.state.clone(),
                });
                at = *p;
            }
            None => {
                steps.push(Step {
                    event: crate::encoder::UNDEF.to_string(),
                    params: vec![],
                    state: n.state.clone(),
                });
                steps.reverse();
                return Trace {
                    constants: worlds[n.world].constants.clone(),
                    steps,
                };
            }
        }
    }
}

/// Breadth-first search up to `scope.depth` transitions. Returns the
/// shallowest violation, first in search order.
pub fn check(tm: &TypedModel, scope: &Scope, node_budget: usize) -> R<CheckResult> {
    let worlds = worlds(tm, scope)?;
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashMap<(usize, ConcreteState), usize> = HashMap::new();
    let mut stats = Stats::default();

    let violation = |nodes: &[Node], at: usize, inv: usize, stats: Stats| CheckResult {
        verdict: Verdict::Violation {
            trace: rebuild(tm, &worlds, nodes, at),
            invariant: inv,
        },
        stats,
    };

    for (wi, w) in worlds.iter().enumerate() {
        let s = initial_state(tm, w)?;
        stats.transitions += 1;
        if seen.contains_key(&(wi, s.clone())) {
            continue;
        }
        seen.insert((wi, s.clone()), nodes.len());
        nodes.push(Node {
            world: wi,
            state: s,
            parent: None,
            depth: 0,
        });
        stats.states = nodes.len();
        let at = nodes.len() - 1;
        if let Some(inv) = violated_invariant(tm, w, &nodes[at].state)? {
            return Ok(violation(&nodes, at, inv, stats));
        }
    }

    let mut next = 0;
    while next < nodes.len() {
        let at = next;
        next += 1;
        if nodes[at].depth >= scope.depth {
            continue;
        }
        let wi = nodes[at].world;
        let w = &worlds[wi];
        for (ev, b, s) in successors(tm, w, &nodes[at].state)? {
            stats.transitions += 1;
            let key = (wi, s);
            if seen.contains_key(&key) {
                continue;
            }
            if nodes.len() >= node_budget {
                return Err(CheckError::NodeBudget(node_budget));
            }
            let depth = nodes[at].depth + 1;
            seen.insert(key.clone(), nodes.len());
            nodes.push(Node {
                world: wi,
                state: key.1,
                parent: Some((at, ev, b)),
                depth,
            });
            stats.states = nodes.len();
            let id = nodes.len() - 1;
            if let Some(inv) = violated_invariant(tm, w, &nodes[id].state)? {
                return Ok(violation(&nodes, id, inv, stats));
            }
        }
    }
    Ok(CheckResult {
        verdict: Verdict::NoViolationWithinDepth(scope.depth),
        stats,
    })
}

/// The world a trace was produced in.
pub fn world_of(tm: &TypedModel, scope: &Scope, trace: &Trace) -> R<World> {
    worlds(tm, scope)?
        .into_iter()
        .find(|w| w.constants == trace.constants)
        .ok_or(CheckError::NoConstants)
}

#[cfg(test)]
mod tests;
