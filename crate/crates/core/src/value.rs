//! Finite values shared by the Event-B evaluator and the relational evaluator.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

/// An element of a carrier set, an enumerated set, or a target-language
/// signature. Ordered by owning set, then by index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem {
    set: Arc<str>,
    index: u32,
    name: Arc<str>,
}

impl Elem {
    pub fn new(set: &str, index: u32, name: &str) -> Self {
        Elem {
            set: Arc::from(set),
            index,
            name: Arc::from(name),
        }
    }

    /// Anonymous carrier-set element, named `<Set><index>`.
    pub fn indexed(set: &str, index: u32) -> Self {
        let name = format!("{set}{index}");
        Elem::new(set, index, &name)
    }

    pub fn set(&self) -> &str {
        &self.set
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A relational atom: a set element or an integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Elem(Elem),
    Int(i64),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Elem(e) => e.fmt(f),
            Atom::Int(i) => i.fmt(f),
        }
    }
}

/// Wraps `v` into the two's-complement range of `bitwidth` bits.
pub fn wrap_int(v: i64, bitwidth: u32) -> i64 {
    let modulus = 1i128 << bitwidth;
    let half = modulus / 2;
    ((v as i128 + half).rem_euclid(modulus) - half) as i64
}

/// All integers representable at `bitwidth`.
pub fn int_range(bitwidth: u32) -> RangeInclusive<i64> {
    let half = 1i64 << (bitwidth - 1);
    -half..=half - 1
}

/// An Event-B value: scalars, maplets, and finite sets of values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Elem(Elem),
    Int(i64),
    Pair(Box<Value>, Box<Value>),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn empty_set() -> Value {
        Value::Set(BTreeSet::new())
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Flattens a non-set value into a tuple of atoms, descending into maplets.
    /// Nested sets have no flat form and yield `None`.
    pub fn flatten_tuple(&self) -> Option<Vec<Atom>> {
        let mut out = Vec::new();
        self.push_atoms(&mut out)?;
        Some(out)
    }

    fn push_atoms(&self, out: &mut Vec<Atom>) -> Option<()> {
        match self {
            Value::Elem(e) => out.push(Atom::Elem(e.clone())),
            Value::Int(i) => out.push(Atom::Int(*i)),
            Value::Pair(a, b) => {
                a.push_atoms(out)?;
                b.push_atoms(out)?;
            }
            Value::Set(_) => return None,
        }
        Some(())
    }

    /// The flat relation denoted by this value: scalars and maplets become a
    /// single tuple, sets become one tuple per member.
    pub fn to_relation(&self) -> Option<Relation> {
        match self {
            Value::Set(members) => {
                let mut tuples = BTreeSet::new();
                for m in members {
                    tuples.insert(m.flatten_tuple()?);
                }
                let arity = tuples.iter().next().map(Vec::len);
                Relation::from_tuples(arity.unwrap_or(1), tuples)
            }
            other => {
                let t = other.flatten_tuple()?;
                Relation::from_tuples(t.len(), BTreeSet::from([t]))
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(e) => e.fmt(f),
            Value::Int(i) => i.fmt(f),
            Value::Pair(a, b) => {
                if matches!(**a, Value::Pair(..)) {
                    write!(f, "({a}) |-> {b}")
                } else {
                    write!(f, "{a} |-> {b}")
                }
            }
            Value::Set(s) => {
                f.write_str("{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    v.fmt(f)?;
                }
                f.write_str("}")
            }
        }
    }
}

/// A finite relation of fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<Atom>>,
}

impl Relation {
    pub fn empty(arity: usize) -> Self {
        Relation {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    /// Builds a relation, returning `None` if a tuple has the wrong arity.
    pub fn from_tuples(arity: usize, tuples: BTreeSet<Vec<Atom>>) -> Option<Self> {
        if arity == 0 || tuples.iter().any(|t| t.len() != arity) {
            return None;
        }
        Some(Relation { arity, tuples })
    }

    pub fn unary<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Relation {
            arity: 1,
            tuples: atoms.into_iter().map(|a| vec![a]).collect(),
        }
    }

    pub fn singleton(atom: Atom) -> Self {
        Relation::unary([atom])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<Atom>> {
        &self.tuples
    }

    pub fn into_tuples(self) -> BTreeSet<Vec<Atom>> {
        self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Atom]) -> bool {
        self.tuples.contains(tuple)
    }

    /// Atoms of a unary relation, in order.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.tuples.iter().filter_map(|t| t.first())
    }

    /// Set equality. Two empty relations are equal regardless of arity.
    pub fn same_tuples(&self, other: &Relation) -> bool {
        self.tuples == other.tuples
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            for (j, a) in t.iter().enumerate() {
                if j > 0 {
                    f.write_str("->")?;
                }
                a.fmt(f)?;
            }
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_matches_twos_complement() {
        assert_eq!(wrap_int(7, 4), 7);
        assert_eq!(wrap_int(8, 4), -8);
        assert_eq!(wrap_int(-9, 4), 7);
        assert_eq!(wrap_int(49, 4), 1);
        assert_eq!(wrap_int(4, 3), -4);
        assert_eq!(int_range(4), -8..=7);
        assert_eq!(int_range(1), -1..=0);
    }

    #[test]
    fn maplet_of_pair_flattens() {
        let a = Value::Elem(Elem::indexed("A", 0));
        let b = Value::Elem(Elem::indexed("B", 1));
        let v = Value::pair(Value::pair(a.clone(), b.clone()), a.clone());
        assert_eq!(v.flatten_tuple().unwrap().len(), 3);
        let s = Value::Set(BTreeSet::from([Value::pair(a, b)]));
        assert_eq!(s.to_relation().unwrap().arity(), 2);
        assert!(Value::Set(BTreeSet::from([s])).to_relation().is_none());
    }
}
