//! Recursive-descent parser for the `.ebm` surface syntax.

use super::ast::*;
use super::lexer::{keyword_text, tokenize, Kw, Tok, Token};
use super::ParseError;

/// Everything declared in one source file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub contexts: Vec<Context>,
    pub machines: Vec<Machine>,
}

pub fn parse_source(text: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut file = SourceFile::default();
    loop {
        match p.peek() {
            Tok::Kw(Kw::Context) => file.contexts.push(p.context()?),
            Tok::Kw(Kw::Machine) => file.machines.push(p.machine()?),
            Tok::Eof => break,
            _ => return Err(p.unexpected("CONTEXT or MACHINE")),
        }
    }
    Ok(file)
}

/// Parses a source holding exactly one machine and at most one context.
pub fn parse_machine(text: &str) -> Result<(Machine, Option<Context>), ParseError> {
    let file = parse_source(text)?;
    let end = Pos::default();
    if file.contexts.len() > 1 {
        return Err(ParseError::new(
            file.contexts[1].name.pos,
            "only one context per machine source is supported",
        ));
    }
    let mut machines = file.machines.into_iter();
    let machine = machines
        .next()
        .ok_or_else(|| ParseError::new(end, "source declares no MACHINE"))?;
    if let Some(extra) = machines.next() {
        return Err(ParseError::new(extra.name.pos, "source declares more than one MACHINE"));
    }
    Ok((machine, file.contexts.into_iter().next()))
}

/// Parses a source holding exactly one context.
pub fn parse_context(text: &str) -> Result<Context, ParseError> {
    let file = parse_source(text)?;
    if !file.machines.is_empty() || file.contexts.len() != 1 {
        return Err(ParseError::new(Pos::default(), "expected exactly one CONTEXT"));
    }
    Ok(file.contexts.into_iter().next().unwrap())
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_predicate(text: &str) -> Result<Pred, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.pred()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Int(i) => format!("integer {i}"),
        Tok::Kw(k) => format!("'{}'", keyword_text(*k)),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

fn is_section_start(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Kw(
            Kw::Machine
                | Kw::Sees
                | Kw::Variables
                | Kw::Invariants
                | Kw::Initialisation
                | Kw::Event
                | Kw::Guards
                | Kw::Actions
                | Kw::End
                | Kw::Context
                | Kw::Sets
                | Kw::Enum
                | Kw::Constants
                | Kw::Axioms
        ) | Tok::Eof
    )
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(
            self.here(),
            format!("expected {expected}, found {}", describe(self.peek())),
        )
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{sym}'")))
        }
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        if *self.peek() == Tok::Kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: Kw) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{}'", keyword_text(kw))))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Spanned::new(name, pos))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut out = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            out.push(self.ident()?);
            self.eat_sym(",");
        }
        Ok(out)
    }

    fn pred_list(&mut self) -> Result<Vec<Spanned<Pred>>, ParseError> {
        let mut out = Vec::new();
        while !is_section_start(self.peek()) {
            let pos = self.here();
            out.push(Spanned::new(self.pred()?, pos));
            self.eat_sym(";");
        }
        Ok(out)
    }

    fn action_list(&mut self) -> Result<Vec<Spanned<Action>>, ParseError> {
        let mut out = Vec::new();
        while !is_section_start(self.peek()) {
            let pos = self.here();
            let target = self.ident()?;
            match self.peek() {
                Tok::Sym(":=") => {
                    self.bump();
                }
                Tok::Sym("::") | Tok::Sym(":|") => {
                    return Err(ParseError::new(
                        self.here(),
                        "only deterministic assignment ':=' is supported",
                    ))
                }
                Tok::Sym(",") => {
                    return Err(ParseError::new(
                        self.here(),
                        "multiple assignment is not supported; write one ':=' per variable",
                    ))
                }
                _ => return Err(self.unexpected("':='")),
            }
            let value = self.expr()?;
            out.push(Spanned::new(Action { target, value }, pos));
            self.eat_sym(";");
        }
        Ok(out)
    }

    fn context(&mut self) -> Result<Context, ParseError> {
        self.expect_kw(Kw::Context)?;
        let name = self.ident()?;
        let mut ctx = Context {
            name,
            ..Context::default()
        };
        if self.eat_kw(Kw::Sets) {
            ctx.carrier_sets = self.ident_list()?;
        }
        while self.eat_kw(Kw::Enum) {
            while let Tok::Ident(_) = self.peek() {
                let name = self.ident()?;
                self.expect_sym("=")?;
                self.expect_sym("{")?;
                let mut members = vec![self.ident()?];
                while self.eat_sym(",") {
                    members.push(self.ident()?);
                }
                self.expect_sym("}")?;
                ctx.enumerated_sets.push(EnumSet { name, members });
                self.eat_sym(";");
            }
        }
        if self.eat_kw(Kw::Constants) {
            ctx.constants = self.ident_list()?;
        }
        if self.eat_kw(Kw::Axioms) {
            ctx.axioms = self.pred_list()?;
        }
        self.expect_kw(Kw::End)?;
        Ok(ctx)
    }

    fn machine(&mut self) -> Result<Machine, ParseError> {
        self.expect_kw(Kw::Machine)?;
        let name = self.ident()?;
        let sees = if self.eat_kw(Kw::Sees) {
            Some(self.ident()?)
        } else {
            None
        };
        let variables = if self.eat_kw(Kw::Variables) {
            self.ident_list()?
        } else {
            Vec::new()
        };
        let invariants = if self.eat_kw(Kw::Invariants) {
            self.pred_list()?
        } else {
            Vec::new()
        };
        let initialisation = if self.eat_kw(Kw::Initialisation) {
            self.action_list()?
        } else {
            Vec::new()
        };
        let mut events = Vec::new();
        while self.eat_kw(Kw::Event) {
            let name = self.ident()?;
            let guards = if self.eat_kw(Kw::Guards) {
                self.pred_list()?
            } else {
                Vec::new()
            };
            let actions = if self.eat_kw(Kw::Actions) {
                self.action_list()?
            } else {
                Vec::new()
            };
            self.expect_kw(Kw::End)?;
            events.push(Event { name, guards, actions });
        }
        self.expect_kw(Kw::End)?;
        Ok(Machine {
            name,
            sees,
            variables,
            invariants,
            initialisation,
            events,
        })
    }

    // Predicates, loosest first: quantifiers, =>, or, &, not, comparisons.

    fn pred(&mut self) -> Result<Pred, ParseError> {
        match self.peek() {
            Tok::Kw(Kw::Forall) | Tok::Kw(Kw::Exists) => self.quantified(),
            _ => self.implication(),
        }
    }

    fn quantified(&mut self) -> Result<Pred, ParseError> {
        let forall = matches!(self.bump().tok, Tok::Kw(Kw::Forall));
        let mut vars = vec![self.ident()?.node];
        while self.eat_sym(",") {
            vars.push(self.ident()?.node);
        }
        self.expect_sym(".")?;
        let body = Box::new(self.pred()?);
        Ok(if forall {
            Pred::Forall(vars, body)
        } else {
            Pred::Exists(vars, body)
        })
    }

    fn implication(&mut self) -> Result<Pred, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_sym("=>") {
            let rhs = self.implication()?;
            return Ok(Pred::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat_kw(Kw::Or) {
            let rhs = self.conjunction()?;
            lhs = Pred::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Pred, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat_sym("&") {
            let rhs = self.negation()?;
            lhs = Pred::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Pred, ParseError> {
        match self.peek() {
            Tok::Kw(Kw::Not) => {
                self.bump();
                Ok(Pred::negate(self.negation()?))
            }
            Tok::Kw(Kw::Forall) | Tok::Kw(Kw::Exists) => self.quantified(),
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Pred, ParseError> {
        let start = self.pos;
        if *self.peek() == Tok::Sym("(") {
            // Either a parenthesised predicate or an expression starting with '('.
            match self.try_comparison() {
                Ok(p) => return Ok(p),
                Err(expr_err) => {
                    self.pos = start;
                    self.bump();
                    let inner = self.pred().map_err(|pred_err| {
                        if pred_err.pos >= expr_err.pos {
                            pred_err
                        } else {
                            expr_err
                        }
                    })?;
                    self.expect_sym(")")?;
                    return Ok(inner);
                }
            }
        }
        self.try_comparison()
    }

    fn try_comparison(&mut self) -> Result<Pred, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym(":") => CmpOp::In,
            Tok::Sym("/:") => CmpOp::NotIn,
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("/=") => CmpOp::Neq,
            Tok::Sym("<:") => CmpOp::Subset,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.unexpected("comparison or membership operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Pred::Cmp(op, lhs, rhs))
    }

    // Expressions, loosest first: maplet, type constructors, union/minus,
    // intersection, restrictions, + -, * / mod, ^, atoms.

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.type_level()?;
        while self.eat_sym("|->") {
            let rhs = self.type_level()?;
            lhs = Expr::maplet(lhs, rhs);
        }
        Ok(lhs)
    }

    fn class_token(&self) -> Option<RelClass> {
        match self.peek() {
            Tok::Sym(s) => RelClass::ALL.iter().find(|c| c.token() == *s).copied(),
            _ => None,
        }
    }

    fn type_level(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.union_level()?;
        while let Some(class) = self.class_token() {
            self.bump();
            let rhs = self.union_level()?;
            lhs = Expr::type_ctor(class, lhs, rhs);
        }
        Ok(lhs)
    }

    fn binary_level(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) => match ops.iter().find(|(t, _)| t == s) {
                    Some((_, op)) => *op,
                    None => break,
                },
                Tok::Kw(Kw::Mod) if ops.iter().any(|(t, _)| *t == "mod") => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let rhs = next(self)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn union_level(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[("\\/", BinOp::Union), ("\\", BinOp::SetMinus)], Self::inter_level)
    }

    fn inter_level(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[("/\\", BinOp::Inter)], Self::restrict_level)
    }

    fn restrict_level(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                ("<|", BinOp::DomRes),
                ("<<|", BinOp::DomSub),
                ("|>", BinOp::RanRes),
                ("|>>", BinOp::RanSub),
            ],
            Self::additive,
        )
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("mod", BinOp::Mod)],
            Self::power,
        )
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_sym("^") {
            let exp = self.power()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                return Ok(Expr::Ident(name));
            }
            Tok::Int(v) => {
                self.bump();
                return Ok(Expr::Int(v));
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            Tok::Sym("{") => {
                self.bump();
                if self.eat_sym("}") {
                    return Ok(Expr::EmptySet);
                }
                let mut items = vec![self.expr()?];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym("}")?;
                return Ok(Expr::SetLit(items));
            }
            Tok::Kw(Kw::Dom) => UnOp::Dom,
            Tok::Kw(Kw::Ran) => UnOp::Ran,
            Tok::Kw(Kw::Prj1) => UnOp::Prj1,
            Tok::Kw(Kw::Prj2) => UnOp::Prj2,
            Tok::Kw(Kw::Id) => UnOp::Id,
            _ => return Err(self.unexpected("expression")),
        };
        self.bump();
        self.expect_sym("(")?;
        let arg = self.expr()?;
        self.expect_sym(")")?;
        Ok(Expr::unary(op, arg))
    }
}
