use std::fmt::Write;

use super::ast::*;

pub(crate) const P_QUANT: u8 = 0;
pub(crate) const P_OR: u8 = 1;
pub(crate) const P_IFF: u8 = 2;
pub(crate) const P_IMPLIES: u8 = 3;
pub(crate) const P_AND: u8 = 4;
pub(crate) const P_NOT: u8 = 5;
pub(crate) const P_CMP: u8 = 6;
pub(crate) const P_MULT: u8 = 7;
pub(crate) const P_UNION: u8 = 8;
pub(crate) const P_INTER: u8 = 9;
pub(crate) const P_ARROW: u8 = 10;
pub(crate) const P_RESTRICT: u8 = 11;
pub(crate) const P_JOIN: u8 = 12;
pub(crate) const P_UNARY: u8 = 13;
pub(crate) const P_ATOM: u8 = 14;

pub(crate) fn binary_prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => P_OR,
        BinaryOp::Iff => P_IFF,
        BinaryOp::Implies => P_IMPLIES,
        BinaryOp::And => P_AND,
        BinaryOp::In | BinaryOp::Eq | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => P_CMP,
        BinaryOp::Union | BinaryOp::Diff => P_UNION,
        BinaryOp::Inter => P_INTER,
        BinaryOp::DomRes | BinaryOp::RanRes => P_RESTRICT,
        BinaryOp::Join => P_JOIN,
    }
}

fn prec(e: &AlloyExpr) -> u8 {
    match e {
        AlloyExpr::Quant(..) | AlloyExpr::Let(..) => P_QUANT,
        AlloyExpr::IfElse(..) => P_IMPLIES,
        AlloyExpr::Binary(op, ..) => binary_prec(*op),
        AlloyExpr::Unary(UnaryOp::Not, _) => P_NOT,
        AlloyExpr::Unary(UnaryOp::Mult(_), _) => P_MULT,
        AlloyExpr::Unary(UnaryOp::Transpose, _) => P_UNARY,
        AlloyExpr::Int(v) if *v < 0 => P_UNARY,
        AlloyExpr::Product { .. } => P_ARROW,
        _ => P_ATOM,
    }
}

struct Printer {
    out: String,
}

impl Printer {
    fn indent(&mut self, level: usize) {
        for _ in 0..level {
            self.out.push_str("  ");
        }
    }

    fn decls(&mut self, decls: &[Decl], level: usize) {
        for (i, d) in decls.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.out.push_str(&d.names.join(", "));
            self.out.push_str(" : ");
            if let Some(m) = d.mult {
                let _ = write!(self.out, "{} ", m.keyword());
            }
            self.expr(&d.bound, P_UNION, level);
        }
    }

    /// Items of a braced block, one per line at `level`.
    fn block_items(&mut self, items: &[BlockItem], level: usize) {
        for item in items {
            self.indent(level);
            match item {
                BlockItem::Comment(c) => {
                    let _ = write!(self.out, "// {c}");
                }
                BlockItem::Formula(f) => self.expr(f, P_QUANT, level),
            }
            self.out.push('\n');
        }
    }

    fn block(&mut self, items: &[BlockItem], level: usize) {
        self.out.push_str("{\n");
        self.block_items(items, level + 1);
        self.indent(level);
        self.out.push('}');
    }

    /// Quantifier and let bodies: a block, or `| formula`.
    fn body(&mut self, body: &AlloyExpr, level: usize) {
        match body {
            AlloyExpr::Block(items) => {
                self.out.push(' ');
                self.block(items, level);
            }
            other => {
                self.out.push_str(" | ");
                self.expr(other, P_QUANT, level);
            }
        }
    }

    fn expr(&mut self, e: &AlloyExpr, min: u8, level: usize) {
        let p = prec(e);
        let paren = p < min;
        if paren {
            self.out.push('(');
        }
        match e {
            AlloyExpr::Name(n) => self.out.push_str(n),
            AlloyExpr::Int(v) => {
                let _ = write!(self.out, "{v}");
            }
            AlloyExpr::None => self.out.push_str("none"),
            AlloyExpr::Univ => self.out.push_str("univ"),
            AlloyExpr::Iden => self.out.push_str("iden"),
            AlloyExpr::Unary(UnaryOp::Not, a) => {
                self.out.push_str("!(");
                self.expr(a, P_QUANT, level);
                self.out.push(')');
            }
            AlloyExpr::Unary(UnaryOp::Transpose, a) => {
                self.out.push('~');
                self.expr(a, P_UNARY, level);
            }
            AlloyExpr::Unary(UnaryOp::Mult(q), a) => {
                let _ = write!(self.out, "{} ", q.keyword());
                self.expr(a, P_UNION, level);
            }
            AlloyExpr::Binary(op, a, b) => {
                let (l, r) = match op {
                    BinaryOp::Implies => (p + 1, p),
                    _ if p == P_CMP => (p + 1, p + 1),
                    _ => (p, p + 1),
                };
                self.expr(a, l, level);
                if *op == BinaryOp::Join {
                    self.out.push('.');
                } else {
                    let _ = write!(self.out, " {} ", op.token());
                }
                self.expr(b, r, level);
            }
            AlloyExpr::Product {
                left,
                left_mult,
                right_mult,
                right,
            } => {
                self.expr(left, P_ARROW, level);
                self.out.push(' ');
                if let Some(m) = left_mult {
                    let _ = write!(self.out, "{} ", m.keyword());
                }
                self.out.push_str("->");
                if let Some(m) = right_mult {
                    let _ = write!(self.out, " {}", m.keyword());
                }
                self.out.push(' ');
                self.expr(right, P_ARROW + 1, level);
            }
            AlloyExpr::IfElse(c, t, f) => {
                self.expr(c, P_IMPLIES + 1, level);
                self.out.push_str(" implies ");
                self.expr(t, P_IMPLIES + 1, level);
                self.out.push_str(" else ");
                self.expr(f, P_IMPLIES, level);
            }
            AlloyExpr::Call(f, args) => {
                self.out.push_str(f);
                self.out.push('[');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(a, P_QUANT, level);
                }
                self.out.push(']');
            }
            AlloyExpr::Quant(q, decls, body) => {
                let _ = write!(self.out, "{} ", q.keyword());
                self.decls(decls, level);
                self.body(body, level);
            }
            AlloyExpr::Let(binds, body) => {
                self.out.push_str("let ");
                for (i, (n, v)) in binds.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    let _ = write!(self.out, "{n} = ");
                    self.expr(v, P_UNION, level);
                }
                self.body(body, level);
            }
            AlloyExpr::Comprehension(decls, body) => {
                self.out.push('{');
                self.decls(decls, level);
                self.out.push_str(" | ");
                self.expr(body, P_QUANT, level);
                self.out.push('}');
            }
            AlloyExpr::Block(items) => self.block(items, level),
        }
        if paren {
            self.out.push(')');
        }
    }

    /// Paragraph body `{ ... }`; bodies are always blocks.
    fn paragraph_body(&mut self, body: &AlloyExpr) {
        match body {
            AlloyExpr::Block(items) => self.block(items, 0),
            other => self.block(&[BlockItem::Formula(other.clone())], 0),
        }
    }

    fn paragraph(&mut self, p: &Paragraph) {
        match p {
            Paragraph::Comment(c) => {
                for line in c.lines() {
                    let _ = writeln!(self.out, "// {line}");
                }
                return;
            }
            Paragraph::Sig(s) => {
                if s.is_abstract {
                    self.out.push_str("abstract ");
                }
                if let Some(m) = s.mult {
                    let _ = write!(self.out, "{} ", m.keyword());
                }
                let _ = write!(self.out, "sig {}", s.names.join(", "));
                if let Some(parent) = &s.extends {
                    let _ = write!(self.out, " extends {parent}");
                }
                if s.fields.is_empty() {
                    self.out.push_str(" {}");
                } else {
                    self.out.push_str(" {\n");
                    for (i, f) in s.fields.iter().enumerate() {
                        let _ = write!(self.out, "  {} : ", f.name);
                        self.expr(&f.bound, P_UNION, 1);
                        if i + 1 < s.fields.len() {
                            self.out.push(',');
                        }
                        self.out.push('\n');
                    }
                    self.out.push('}');
                }
            }
            Paragraph::Fun(f) => {
                let _ = write!(self.out, "fun {}[", f.name);
                self.decls(&f.params, 0);
                self.out.push_str("] : ");
                if let Some(m) = f.result_mult {
                    let _ = write!(self.out, "{} ", m.keyword());
                }
                self.expr(&f.result, P_UNION, 0);
                self.out.push(' ');
                self.paragraph_body(&f.body);
            }
            Paragraph::Pred(p) => {
                let _ = write!(self.out, "pred {}[", p.name);
                self.decls(&p.params, 0);
                self.out.push_str("] ");
                self.paragraph_body(&p.body);
            }
            Paragraph::Fact(f) => {
                self.out.push_str("fact ");
                if let Some(n) = &f.name {
                    let _ = write!(self.out, "{n} ");
                }
                self.paragraph_body(&f.body);
            }
            Paragraph::Assert(a) => {
                let _ = write!(self.out, "assert {} ", a.name);
                self.paragraph_body(&a.body);
            }
            Paragraph::Check(c) => {
                let _ = write!(self.out, "check {}", c.assertion);
                let mut scopes: Vec<String> = c.bounds.iter().map(|(s, n)| format!("exactly {n} {s}")).collect();
                if c.bitwidth != DEFAULT_BITWIDTH {
                    scopes.push(format!("{} Int", c.bitwidth));
                }
                if !scopes.is_empty() {
                    let _ = write!(self.out, " for {}", scopes.join(", "));
                }
            }
        }
        self.out.push('\n');
    }
}

/// Prints one expression on a single line where possible.
pub fn print_expr(e: &AlloyExpr) -> String {
    let mut p = Printer { out: String::new() };
    p.expr(e, P_QUANT, 0);
    p.out
}

pub fn print_paragraph(para: &Paragraph) -> String {
    let mut p = Printer { out: String::new() };
    p.paragraph(para);
    p.out
}

/// Deterministic module text: header, opens, then paragraphs separated by
/// blank lines. Comment paragraphs attach to the paragraph that follows.
pub fn print_module(m: &AlloyModule) -> String {
    let mut p = Printer { out: String::new() };
    let _ = writeln!(p.out, "module {}", m.name);
    if !m.opens.is_empty() {
        p.out.push('\n');
    }
    for o in &m.opens {
        let _ = write!(p.out, "open {}", o.path);
        if !o.args.is_empty() {
            let _ = write!(p.out, "[{}]", o.args.join(", "));
        }
        if let Some(a) = &o.alias {
            let _ = write!(p.out, " as {a}");
        }
        p.out.push('\n');
    }
    let mut after_comment = false;
    for para in &m.paragraphs {
        if !after_comment {
            p.out.push('\n');
        }
        p.paragraph(para);
        after_comment = matches!(para, Paragraph::Comment(_));
    }
    p.out
}

impl std::fmt::Display for AlloyExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_expr(self))
    }
}
