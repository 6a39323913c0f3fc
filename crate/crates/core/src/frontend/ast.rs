//! Event-B abstract syntax.

use std::fmt;

/// Source position (1-based line and column).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A node with its source position. Positions do not take part in equality,
/// so trees parsed from differently formatted sources compare equal.
#[derive(Clone, Debug)]
pub struct Spanned<T> {
    pub node: T,
    pub pos: Pos,
}

impl<T> Spanned<T> {
    pub fn new(node: T, pos: Pos) -> Self {
        Spanned { node, pos }
    }

    pub fn bare(node: T) -> Self {
        Spanned {
            node,
            pos: Pos::default(),
        }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

impl<T> std::ops::Deref for Spanned<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.node
    }
}

pub type Ident = Spanned<String>;

/// Relational type constructors: relation and the function classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelClass {
    Relation,
    TotalFn,
    PartialFn,
    TotalSurj,
    PartialSurj,
    TotalInj,
}

impl RelClass {
    pub const ALL: [RelClass; 6] = [
        RelClass::Relation,
        RelClass::TotalFn,
        RelClass::PartialFn,
        RelClass::TotalSurj,
        RelClass::PartialSurj,
        RelClass::TotalInj,
    ];

    pub fn token(self) -> &'static str {
        match self {
            RelClass::Relation => "<->",
            RelClass::TotalFn => "-->",
            RelClass::PartialFn => "+->",
            RelClass::TotalSurj => "->>",
            RelClass::PartialSurj => "+>>",
            RelClass::TotalInj => ">->",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelClass::Relation => "relation",
            RelClass::TotalFn => "total function",
            RelClass::PartialFn => "partial function",
            RelClass::TotalSurj => "total surjection",
            RelClass::PartialSurj => "partial surjection",
            RelClass::TotalInj => "total injection",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Dom,
    Ran,
    Prj1,
    Prj2,
    Id,
}

impl UnOp {
    pub fn keyword(self) -> &'static str {
        match self {
            UnOp::Dom => "dom",
            UnOp::Ran => "ran",
            UnOp::Prj1 => "prj1",
            UnOp::Prj2 => "prj2",
            UnOp::Id => "id",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Union,
    Inter,
    SetMinus,
    DomRes,
    DomSub,
    RanRes,
    RanSub,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
}

impl BinOp {
    pub fn token(self) -> &'static str {
        match self {
            BinOp::Union => "\\/",
            BinOp::Inter => "/\\",
            BinOp::SetMinus => "\\",
            BinOp::DomRes => "<|",
            BinOp::DomSub => "<<|",
            BinOp::RanRes => "|>",
            BinOp::RanSub => "|>>",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Pow => "^",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod | BinOp::Pow
        )
    }
}

/// Event-B expressions. Arity is fixed by the variant, so ill-formed trees
/// cannot be built.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Ident(String),
    Int(i64),
    EmptySet,
    SetLit(Vec<Expr>),
    Maplet(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    TypeCtor(RelClass, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn maplet(a: Expr, b: Expr) -> Expr {
        Expr::Maplet(Box::new(a), Box::new(b))
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn type_ctor(class: RelClass, a: Expr, b: Expr) -> Expr {
        Expr::TypeCtor(class, Box::new(a), Box::new(b))
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Expr::Ident(n) => Some(n),
            _ => None,
        }
    }

    /// Visits every identifier occurrence.
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Ident(n) => f(n),
            Expr::Int(_) | Expr::EmptySet => {}
            Expr::SetLit(xs) => xs.iter().for_each(|x| x.for_each_ident(f)),
            Expr::Maplet(a, b) | Expr::Binary(_, a, b) | Expr::TypeCtor(_, a, b) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
            }
            Expr::Unary(_, a) => a.for_each_ident(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    In,
    NotIn,
    Eq,
    Neq,
    Subset,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn token(self) -> &'static str {
        match self {
            CmpOp::In => ":",
            CmpOp::NotIn => "/:",
            CmpOp::Eq => "=",
            CmpOp::Neq => "/=",
            CmpOp::Subset => "<:",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Cmp(CmpOp, Expr, Expr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Forall(Vec<String>, Box<Pred>),
    Exists(Vec<String>, Box<Pred>),
}

impl Pred {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Pred {
        Pred::Cmp(op, a, b)
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Implies(Box::new(a), Box::new(b))
    }

    pub fn negate(a: Pred) -> Pred {
        Pred::Not(Box::new(a))
    }

    /// Flattens nested conjunctions, left to right.
    pub fn conjuncts(&self) -> Vec<&Pred> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a Pred, out: &mut Vec<&'a Pred>) {
            match p {
                Pred::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// The `x : E` shape, if this predicate has it.
    pub fn as_membership(&self) -> Option<(&str, &Expr)> {
        match self {
            Pred::Cmp(CmpOp::In, Expr::Ident(x), e) => Some((x, e)),
            _ => None,
        }
    }
}

/// Deterministic assignment `target := value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub target: Ident,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumSet {
    pub name: Ident,
    pub members: Vec<Ident>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Context {
    pub name: Ident,
    pub carrier_sets: Vec<Ident>,
    pub enumerated_sets: Vec<EnumSet>,
    pub constants: Vec<Ident>,
    pub axioms: Vec<Spanned<Pred>>,
}

impl Default for Ident {
    fn default() -> Self {
        Spanned::bare(String::new())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub name: Ident,
    pub guards: Vec<Spanned<Pred>>,
    pub actions: Vec<Spanned<Action>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: Ident,
    pub sees: Option<Ident>,
    pub variables: Vec<Ident>,
    pub invariants: Vec<Spanned<Pred>>,
    pub initialisation: Vec<Spanned<Action>>,
    pub events: Vec<Event>,
}

impl Machine {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.node == name)
    }
}

/// An event parameter, introduced by the first membership guard on a fresh
/// identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub domain: Expr,
    pub guard_index: usize,
}
