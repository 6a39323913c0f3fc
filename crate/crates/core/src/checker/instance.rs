//! Relational instance of the encoded module that corresponds to a run of
//! the checker.

use std::collections::{BTreeMap, BTreeSet};

use super::{Step, World};
use crate::alloy::Instance;
use crate::encoder::{aux_sigs, event_enum_name, CONSTS, EVENTS, EV_FIELD, UNDEF};
use crate::typing::{sig_tree, SigTree, TypedModel};
use crate::value::{Atom, Elem, Relation, Value};

pub const ALLOY_STATE: &str = crate::encoder::STATE;

fn rel(arity: usize, tuples: BTreeSet<Vec<Atom>>) -> Relation {
    Relation::from_tuples(arity, tuples).unwrap_or_else(|| Relation::empty(arity))
}

#[derive(Default)]
struct Interner {
    atoms: BTreeMap<(String, Value), Atom>,
    sigs: BTreeMap<String, BTreeSet<Vec<Atom>>>,
    rel: BTreeSet<Vec<Atom>>,
}

impl Interner {
    fn atom(&mut self, tree: &SigTree, v: &Value) -> Atom {
        let SigTree::Rel { name, left, right } = tree else {
            let t = v.flatten_tuple().expect("scalar value");
            return t.into_iter().next().expect("one atom");
        };
        if let Some(a) = self.atoms.get(&(name.clone(), v.clone())) {
            return a.clone();
        }
        let members = self.sigs.entry(name.clone()).or_default();
        let i = members.len() as u32;
        let a = Atom::Elem(Elem::new(name, i, &format!("{name}{i}")));
        members.insert(vec![a.clone()]);
        self.atoms.insert((name.clone(), v.clone()), a.clone());
        for m in v.as_set().into_iter().flatten() {
            if let Value::Pair(x, y) = m {
                let l = self.atom(left, x);
                let r = self.atom(right, y);
                self.rel.insert(vec![a.clone(), l, r]);
            }
        }
        a
    }
}

/// The instance with one `State` atom per step, in order, whose fields
/// hold the step's variable values. Relational values are represented by
/// auxiliary atoms, one per distinct value.
pub fn instance_for_states(tm: &TypedModel, world: &World, steps: &[Step]) -> Instance {
    let mut inst = Instance::new(world.bitwidth);
    for (name, v) in &world.sets {
        inst.bind(name, v.to_relation().unwrap_or_else(|| Relation::empty(1)));
    }
    for e in &tm.model.context().enumerated_sets {
        for (i, m) in e.members.iter().enumerate() {
            inst.bind(
                &m.node,
                Relation::singleton(Atom::Elem(Elem::new(&e.name.node, i as u32, &m.node))),
            );
        }
    }

    let mut event_names = vec![UNDEF.to_string()];
    event_names.extend(tm.model.machine().events.iter().map(|e| event_enum_name(&e.name.node)));
    let event_atom = |n: &str| {
        let i = event_names.iter().position(|m| m == n).expect("known event");
        Atom::Elem(Elem::new(EVENTS, i as u32, n))
    };
    for n in &event_names {
        inst.bind(n, Relation::singleton(event_atom(n)));
    }
    inst.bind(EVENTS, Relation::unary(event_names.iter().map(|n| event_atom(n))));

    if !world.constants.is_empty() {
        let c = Atom::Elem(Elem::new(CONSTS, 0, "Consts0"));
        inst.bind(CONSTS, Relation::singleton(c.clone()));
        for (name, v) in &world.constants {
            let mut t = vec![c.clone()];
            t.extend(v.flatten_tuple().expect("scalar constant"));
            inst.bind(name, rel(2, BTreeSet::from([t])));
        }
    }

    let states: Vec<Atom> = (0..steps.len())
        .map(|i| Atom::Elem(Elem::indexed(ALLOY_STATE, i as u32)))
        .collect();
    inst.bind(ALLOY_STATE, Relation::unary(states.iter().cloned()));
    inst.bind("ord/first", Relation::unary(states.first().cloned()));
    inst.bind("ord/last", Relation::unary(states.last().cloned()));
    let next: BTreeSet<Vec<Atom>> = states.windows(2).map(|w| vec![w[0].clone(), w[1].clone()]).collect();
    let prev: BTreeSet<Vec<Atom>> = next.iter().map(|t| vec![t[1].clone(), t[0].clone()]).collect();
    inst.bind("ord/next", rel(2, next));
    inst.bind("ord/prev", rel(2, prev));

    let mut interner = Interner::default();
    for spec in aux_sigs(tm) {
        interner.sigs.entry(spec.name).or_default();
    }
    let mut ev = BTreeSet::new();
    for (s, step) in states.iter().zip(steps) {
        let name = if step.event == UNDEF {
            UNDEF.to_string()
        } else {
            event_enum_name(&step.event)
        };
        ev.insert(vec![s.clone(), event_atom(&name)]);
    }
    inst.bind(EV_FIELD, rel(2, ev));
    for v in &tm.model.machine().variables {
        let tree = sig_tree(&tm.types.variables[&v.node], &v.node);
        let mut field = BTreeSet::new();
        for (s, step) in states.iter().zip(steps) {
            let a = interner.atom(&tree, &step.state[&v.node]);
            field.insert(vec![s.clone(), a]);
        }
        inst.bind(&v.node, rel(2, field));
    }
    for (name, atoms) in &interner.sigs {
        inst.bind(name, rel(1, atoms.clone()));
    }
    inst.bind("rel", rel(3, interner.rel));
    inst
}
