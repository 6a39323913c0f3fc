//! Target-language syntax tree. Formulas and relational expressions share
//! one type, as in the concrete syntax.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mult {
    Lone,
    One,
    Some,
    Set,
}

impl Mult {
    pub fn keyword(self) -> &'static str {
        match self {
            Mult::Lone => "lone",
            Mult::One => "one",
            Mult::Some => "some",
            Mult::Set => "set",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    All,
    Some,
    No,
    One,
    Lone,
}

impl Quant {
    pub fn keyword(self) -> &'static str {
        match self {
            Quant::All => "all",
            Quant::Some => "some",
            Quant::No => "no",
            Quant::One => "one",
            Quant::Lone => "lone",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Transpose,
    /// Multiplicity formula such as `no e` or `some e`.
    Mult(Quant),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Union,
    Diff,
    Inter,
    Join,
    DomRes,
    RanRes,
    In,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinaryOp {
    pub fn token(self) -> &'static str {
        match self {
            BinaryOp::Union => "+",
            BinaryOp::Diff => "-",
            BinaryOp::Inter => "&",
            BinaryOp::Join => ".",
            BinaryOp::DomRes => "<:",
            BinaryOp::RanRes => ":>",
            BinaryOp::In => "in",
            BinaryOp::Eq => "=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "=<",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Implies => "implies",
            BinaryOp::Iff => "iff",
        }
    }
}

/// Variable declarations `a, b : bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decl {
    pub names: Vec<String>,
    pub mult: Option<Mult>,
    pub bound: AlloyExpr,
}

impl Decl {
    pub fn new(names: &[&str], bound: AlloyExpr) -> Self {
        Decl {
            names: names.iter().map(|s| s.to_string()).collect(),
            mult: None,
            bound,
        }
    }

    pub fn with_mult(mut self, mult: Mult) -> Self {
        self.mult = Some(mult);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BlockItem {
    Comment(String),
    Formula(AlloyExpr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AlloyExpr {
    Name(String),
    Int(i64),
    None,
    Univ,
    Iden,
    Unary(UnaryOp, Box<AlloyExpr>),
    Binary(BinaryOp, Box<AlloyExpr>, Box<AlloyExpr>),
    /// `left [m]->[n] right`.
    Product {
        left: Box<AlloyExpr>,
        left_mult: Option<Mult>,
        right_mult: Option<Mult>,
        right: Box<AlloyExpr>,
    },
    /// `cond implies then else otherwise`, on formulas or expressions.
    IfElse(Box<AlloyExpr>, Box<AlloyExpr>, Box<AlloyExpr>),
    /// Function, predicate, or box-join application `f[a, b]`.
    Call(String, Vec<AlloyExpr>),
    Quant(Quant, Vec<Decl>, Box<AlloyExpr>),
    Let(Vec<(String, AlloyExpr)>, Box<AlloyExpr>),
    Comprehension(Vec<Decl>, Box<AlloyExpr>),
    /// Braced conjunction of formulas, possibly interleaved with comments.
    Block(Vec<BlockItem>),
}

impl AlloyExpr {
    pub fn name(n: impl Into<String>) -> Self {
        AlloyExpr::Name(n.into())
    }

    pub fn unary(op: UnaryOp, e: AlloyExpr) -> Self {
        AlloyExpr::Unary(op, Box::new(e))
    }

    pub fn negate(e: AlloyExpr) -> Self {
        AlloyExpr::unary(UnaryOp::Not, e)
    }

    pub fn binary(op: BinaryOp, a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn join(a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::binary(BinaryOp::Join, a, b)
    }

    /// `a.f1.f2...`.
    pub fn path(base: &str, fields: &[&str]) -> Self {
        fields.iter().fold(AlloyExpr::name(base), |acc, f| {
            AlloyExpr::join(acc, AlloyExpr::name(*f))
        })
    }

    pub fn eq(a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::binary(BinaryOp::Eq, a, b)
    }

    pub fn and(a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::binary(BinaryOp::And, a, b)
    }

    pub fn or(a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::binary(BinaryOp::Or, a, b)
    }

    pub fn product(a: AlloyExpr, b: AlloyExpr) -> Self {
        AlloyExpr::Product {
            left: Box::new(a),
            left_mult: None,
            right_mult: None,
            right: Box::new(b),
        }
    }

    pub fn call(f: &str, args: Vec<AlloyExpr>) -> Self {
        AlloyExpr::Call(f.to_string(), args)
    }

    pub fn if_else(c: AlloyExpr, t: AlloyExpr, e: AlloyExpr) -> Self {
        AlloyExpr::IfElse(Box::new(c), Box::new(t), Box::new(e))
    }

    /// Left-nested fold of a non-empty list with a binary operator.
    pub fn fold(op: BinaryOp, items: Vec<AlloyExpr>) -> Option<Self> {
        items.into_iter().reduce(|a, b| AlloyExpr::binary(op, a, b))
    }

    /// `none -> none -> ...` of the given arity.
    pub fn empty(arity: usize) -> Self {
        (1..arity.max(1)).fold(AlloyExpr::None, |acc, _| AlloyExpr::product(acc, AlloyExpr::None))
    }

    /// Formulas of a block, skipping comments.
    pub fn block_formulas(items: &[BlockItem]) -> impl Iterator<Item = &AlloyExpr> {
        items.iter().filter_map(|i| match i {
            BlockItem::Formula(f) => Some(f),
            BlockItem::Comment(_) => None,
        })
    }

    /// Visits every sub-expression, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a AlloyExpr)) {
        f(self);
        match self {
            AlloyExpr::Name(_) | AlloyExpr::Int(_) | AlloyExpr::None | AlloyExpr::Univ | AlloyExpr::Iden => {}
            AlloyExpr::Unary(_, a) => a.walk(f),
            AlloyExpr::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            AlloyExpr::Product { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
            AlloyExpr::IfElse(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
            AlloyExpr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            AlloyExpr::Quant(_, decls, body) | AlloyExpr::Comprehension(decls, body) => {
                decls.iter().for_each(|d| d.bound.walk(f));
                body.walk(f);
            }
            AlloyExpr::Let(binds, body) => {
                binds.iter().for_each(|(_, e)| e.walk(f));
                body.walk(f);
            }
            AlloyExpr::Block(items) => AlloyExpr::block_formulas(items).for_each(|e| e.walk(f)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub bound: AlloyExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigDecl {
    pub names: Vec<String>,
    pub is_abstract: bool,
    pub mult: Option<Mult>,
    pub extends: Option<String>,
    pub fields: Vec<FieldDecl>,
}

impl SigDecl {
    pub fn plain(name: &str) -> Self {
        SigDecl {
            names: vec![name.to_string()],
            is_abstract: false,
            mult: None,
            extends: None,
            fields: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub params: Vec<Decl>,
    pub result_mult: Option<Mult>,
    pub result: AlloyExpr,
    pub body: AlloyExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub params: Vec<Decl>,
    pub body: AlloyExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactDecl {
    pub name: Option<String>,
    pub body: AlloyExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertDecl {
    pub name: String,
    pub body: AlloyExpr,
}

/// `check A for exactly n S, ...`. The integer bitwidth is printed only
/// when it differs from the analyzer's default of 4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckCmd {
    pub assertion: String,
    pub bounds: Vec<(String, u32)>,
    pub bitwidth: u32,
}

pub const DEFAULT_BITWIDTH: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Open {
    pub path: String,
    pub args: Vec<String>,
    pub alias: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Paragraph {
    Comment(String),
    Sig(SigDecl),
    Fun(FunDecl),
    Pred(PredDecl),
    Fact(FactDecl),
    Assert(AssertDecl),
    Check(CheckCmd),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlloyModule {
    pub name: String,
    pub opens: Vec<Open>,
    pub paragraphs: Vec<Paragraph>,
}

impl AlloyModule {
    pub fn new(name: &str) -> Self {
        AlloyModule {
            name: name.to_string(),
            opens: vec![Open {
                path: "util/ordering".to_string(),
                args: vec!["State".to_string()],
                alias: Some("ord".to_string()),
            }],
            paragraphs: Vec::new(),
        }
    }

    pub fn sigs(&self) -> impl Iterator<Item = &SigDecl> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Sig(s) => Some(s),
            _ => None,
        })
    }

    pub fn funs(&self) -> impl Iterator<Item = &FunDecl> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Fun(s) => Some(s),
            _ => None,
        })
    }

    pub fn preds(&self) -> impl Iterator<Item = &PredDecl> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Pred(s) => Some(s),
            _ => None,
        })
    }

    pub fn facts(&self) -> impl Iterator<Item = &FactDecl> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Fact(s) => Some(s),
            _ => None,
        })
    }

    pub fn asserts(&self) -> impl Iterator<Item = &AssertDecl> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Assert(s) => Some(s),
            _ => None,
        })
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckCmd> {
        self.paragraphs.iter().filter_map(|p| match p {
            Paragraph::Check(s) => Some(s),
            _ => None,
        })
    }

    pub fn sig_names(&self) -> impl Iterator<Item = &str> {
        self.sigs().flat_map(|s| s.names.iter().map(String::as_str))
    }

    pub fn sig(&self, name: &str) -> Option<&SigDecl> {
        self.sigs().find(|s| s.names.iter().any(|n| n == name))
    }

    pub fn pred(&self, name: &str) -> Option<&PredDecl> {
        self.preds().find(|p| p.name == name)
    }

    pub fn fun(&self, name: &str) -> Option<&FunDecl> {
        self.funs().find(|p| p.name == name)
    }

    pub fn fact(&self, name: &str) -> Option<&FactDecl> {
        self.facts().find(|p| p.name.as_deref() == Some(name))
    }
}
