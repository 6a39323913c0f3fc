use std::fmt;

pub use crate::frontend::RelClass;

/// Declared type of a variable or constant, read from its typing invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeTerm {
    Given(String),
    Integer,
    Rel(Box<TypeTerm>, Box<TypeTerm>, RelClass),
}

impl TypeTerm {
    pub fn rel(a: TypeTerm, b: TypeTerm, class: RelClass) -> Self {
        TypeTerm::Rel(Box::new(a), Box::new(b), class)
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, TypeTerm::Rel(..))
    }

    /// Type of the values inhabiting this type.
    pub fn value_ty(&self) -> Ty {
        match self {
            TypeTerm::Given(s) => Ty::Given(s.clone()),
            TypeTerm::Integer => Ty::Int,
            TypeTerm::Rel(a, b, _) => Ty::set(Ty::pair(a.value_ty(), b.value_ty())),
        }
    }

    /// Number of `Rel` constructors.
    pub fn constructor_count(&self) -> usize {
        match self {
            TypeTerm::Rel(a, b, _) => 1 + a.constructor_count() + b.constructor_count(),
            _ => 0,
        }
    }
}

impl fmt::Display for TypeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTerm::Given(s) => f.write_str(s),
            TypeTerm::Integer => f.write_str("INT"),
            TypeTerm::Rel(a, b, c) => {
                write!(f, "{a} {} ", c.token())?;
                if b.is_scalar() {
                    write!(f, "{b}")
                } else {
                    write!(f, "({b})")
                }
            }
        }
    }
}

/// Type of an Event-B value. `Unknown` stands for the element type of an
/// empty set not yet fixed by context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Given(String),
    Int,
    Pair(Box<Ty>, Box<Ty>),
    Set(Box<Ty>),
    Unknown,
}

impl Ty {
    pub fn set(t: Ty) -> Ty {
        Ty::Set(Box::new(t))
    }

    pub fn pair(a: Ty, b: Ty) -> Ty {
        Ty::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Ty::Given(_) | Ty::Int)
    }

    pub fn elem(&self) -> Option<&Ty> {
        match self {
            Ty::Set(t) => Some(t),
            _ => None,
        }
    }

    /// Columns this value occupies in a flat tuple. Nested sets are
    /// represented by one auxiliary atom.
    pub fn width(&self) -> usize {
        match self {
            Ty::Pair(a, b) => a.width() + b.width(),
            _ => 1,
        }
    }

    /// Arity of the flat relation denoting a value of this type.
    pub fn arity(&self) -> usize {
        match self {
            Ty::Set(t) => t.width(),
            other => other.width(),
        }
    }

    /// True for scalars and pairs of scalars, at any depth: values that
    /// flatten to a single tuple without auxiliary atoms.
    pub fn is_tuple(&self) -> bool {
        match self {
            Ty::Pair(a, b) => a.is_tuple() && b.is_tuple(),
            Ty::Set(_) => false,
            _ => true,
        }
    }

    /// True when no component is a nested set, i.e. the value has a direct
    /// flat relational form.
    pub fn is_flat(&self) -> bool {
        fn flat_elem(t: &Ty) -> bool {
            match t {
                Ty::Pair(a, b) => flat_elem(a) && flat_elem(b),
                Ty::Set(_) => false,
                _ => true,
            }
        }
        match self {
            Ty::Set(t) => flat_elem(t),
            other => flat_elem(other),
        }
    }
}

/// Most specific common type, if any.
pub fn unify(a: &Ty, b: &Ty) -> Option<Ty> {
    match (a, b) {
        (Ty::Unknown, t) | (t, Ty::Unknown) => Some(t.clone()),
        (Ty::Int, Ty::Int) => Some(Ty::Int),
        (Ty::Given(x), Ty::Given(y)) if x == y => Some(a.clone()),
        (Ty::Set(x), Ty::Set(y)) => Some(Ty::set(unify(x, y)?)),
        (Ty::Pair(a1, b1), Ty::Pair(a2, b2)) => Some(Ty::pair(unify(a1, a2)?, unify(b1, b2)?)),
        _ => None,
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Given(s) => f.write_str(s),
            Ty::Int => f.write_str("INT"),
            Ty::Pair(a, b) => write!(f, "({a} x {b})"),
            Ty::Set(t) => write!(f, "POW({t})"),
            Ty::Unknown => f.write_str("?"),
        }
    }
}

/// Constraint a function class adds on top of a plain relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SideFact {
    Functional,
    Total,
    Surjective,
    Injective,
}

pub fn side_facts(class: RelClass) -> Vec<SideFact> {
    use SideFact::*;
    match class {
        RelClass::Relation => vec![],
        RelClass::PartialFn => vec![Functional],
        RelClass::TotalFn => vec![Functional, Total],
        RelClass::PartialSurj => vec![Functional, Surjective],
        RelClass::TotalSurj => vec![Functional, Total, Surjective],
        RelClass::TotalInj => vec![Functional, Total, Injective],
    }
}

/// One auxiliary signature holding a single flat binary relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigSpec {
    pub name: String,
    pub field_name: String,
    pub left: String,
    pub right: String,
    pub side_facts: Vec<SideFact>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unify_fills_unknowns() {
        let a = Ty::set(Ty::Unknown);
        let b = Ty::set(Ty::pair(Ty::Given("A".into()), Ty::Int));
        assert_eq!(unify(&a, &b), Some(b.clone()));
        assert_eq!(unify(&b, &Ty::set(Ty::Int)), None);
        assert_eq!(b.arity(), 2);
        assert!(b.is_flat());
        assert!(!Ty::set(Ty::pair(b.clone(), Ty::Int)).is_flat());
        assert_eq!(Ty::set(Ty::pair(b, Ty::Int)).arity(), 2);
    }

    #[test]
    fn display_nested_type() {
        let t = TypeTerm::rel(
            TypeTerm::rel(
                TypeTerm::Given("A".into()),
                TypeTerm::Given("B".into()),
                RelClass::TotalFn,
            ),
            TypeTerm::Given("C".into()),
            RelClass::Relation,
        );
        assert_eq!(t.to_string(), "A --> B <-> C");
        assert_eq!(t.constructor_count(), 2);
    }
}
