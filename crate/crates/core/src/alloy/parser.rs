//! Parser for the subset of the target language that the printer emits.
//! Used to check that generated text is well formed and to compare modules
//! structurally.

use super::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct AlloyParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64),
    Sym(&'static str),
    Comment(String),
    Eof,
}

struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

const SYMBOLS: &[&str] = &[
    "->", "<:", ":>", "=<", ">=", "&&", "||", "=", "<", ">", "+", "-", "&", ".", "~", "!", "{", "}", "[", "]", "(",
    ")", ",", ":", "|",
];

const KEYWORDS: &[&str] = &[
    "module", "open", "as", "sig", "abstract", "extends", "one", "lone", "some", "set", "no", "all", "fun", "pred",
    "fact", "assert", "check", "for", "exactly", "let", "implies", "else", "and", "or", "not", "iff", "in", "none",
    "univ", "iden",
];

fn is_word_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

fn tokenize(src: &str) -> Result<Vec<Token>, AlloyParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < b.len() {
        let c = b[i];
        let (tl, tc) = (line, col);
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        if src[i..].starts_with("//") {
            let start = i + 2;
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            push(&mut out, Tok::Comment(src[start..i].trim().to_string()));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len()
                && (is_word_char(b[i]) || (b[i] == b'/' && i + 1 < b.len() && b[i + 1].is_ascii_alphabetic()))
            {
                i += 1;
            }
            col += (i - start) as u32;
            push(&mut out, Tok::Word(src[start..i].to_string()));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            col += (i - start) as u32;
            let v = src[start..i].parse().map_err(|_| AlloyParseError {
                line: tl,
                col: tc,
                message: "integer literal out of range".into(),
            })?;
            push(&mut out, Tok::Int(v));
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                push(&mut out, Tok::Sym(s));
            }
            None => {
                return Err(AlloyParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character '{}'", src[i..].chars().next().unwrap()),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    /// Comments are skipped inside expressions and kept between block
    /// items and paragraphs.
    at: usize,
}

type R<T> = Result<T, AlloyParseError>;

fn quant_of(w: &str) -> Option<Quant> {
    match w {
        "all" => Some(Quant::All),
        "some" => Some(Quant::Some),
        "no" => Some(Quant::No),
        "one" => Some(Quant::One),
        "lone" => Some(Quant::Lone),
        _ => None,
    }
}

fn mult_of(w: &str) -> Option<Mult> {
    match w {
        "lone" => Some(Mult::Lone),
        "one" => Some(Mult::One),
        "some" => Some(Mult::Some),
        "set" => Some(Mult::Set),
        _ => None,
    }
}

impl Parser {
    fn skip_comments(&mut self) {
        while matches!(self.toks[self.at].tok, Tok::Comment(_)) {
            self.at += 1;
        }
    }

    /// The `n`-th upcoming non-comment token, without consuming comments.
    fn peek_n(&mut self, n: usize) -> &Tok {
        let mut i = self.at;
        let mut k = 0;
        loop {
            if !matches!(self.toks[i].tok, Tok::Comment(_)) {
                if k == n || matches!(self.toks[i].tok, Tok::Eof) {
                    return &self.toks[i].tok;
                }
                k += 1;
            }
            i += 1;
        }
    }

    fn peek(&mut self) -> &Tok {
        self.peek_n(0)
    }

    fn next(&mut self) -> Tok {
        self.skip_comments();
        let t = self.toks[self.at].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.at += 1;
        }
        t
    }

    fn error<T>(&mut self, message: impl Into<String>) -> R<T> {
        self.skip_comments();
        let t = &self.toks[self.at];
        Err(AlloyParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn is_sym(&mut self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&mut self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> R<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            let found = format!("{:?}", self.peek());
            self.error(format!("expected '{s}', found {found}"))
        }
    }

    fn expect_word(&mut self, w: &str) -> R<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            let found = format!("{:?}", self.peek());
            self.error(format!("expected '{w}', found {found}"))
        }
    }

    fn name(&mut self) -> R<String> {
        match self.peek().clone() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.next();
                Ok(w)
            }
            other => self.error(format!("expected a name, found {other:?}")),
        }
    }

    fn is_name_at(&mut self, n: usize) -> bool {
        matches!(self.peek_n(n), Tok::Word(w) if !KEYWORDS.contains(&w.as_str()))
    }

    fn int(&mut self) -> R<i64> {
        match self.next() {
            Tok::Int(v) => Ok(v),
            other => self.error(format!("expected a number, found {other:?}")),
        }
    }

    // ----- module structure -----

    fn module(&mut self) -> R<AlloyModule> {
        self.expect_word("module")?;
        let name = self.name()?;
        let mut m = AlloyModule {
            name,
            opens: Vec::new(),
            paragraphs: Vec::new(),
        };
        while self.is_word("open") {
            self.next();
            let path = match self.next() {
                Tok::Word(w) => w,
                other => return self.error(format!("expected a module path, found {other:?}")),
            };
            let mut args = Vec::new();
            if self.eat_sym("[") {
                loop {
                    args.push(self.name()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("]")?;
            }
            let alias = if self.eat_word("as") { Some(self.name()?) } else { None };
            m.opens.push(Open { path, args, alias });
        }
        loop {
            let mut comments = Vec::new();
            while let Tok::Comment(c) = &self.toks[self.at].tok {
                comments.push(c.clone());
                self.at += 1;
            }
            if !comments.is_empty() {
                m.paragraphs.push(Paragraph::Comment(comments.join("\n")));
            }
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
            let p = self.paragraph()?;
            m.paragraphs.push(p);
        }
        Ok(m)
    }

    fn paragraph(&mut self) -> R<Paragraph> {
        let w = match self.peek().clone() {
            Tok::Word(w) => w,
            other => return self.error(format!("expected a paragraph, found {other:?}")),
        };
        match w.as_str() {
            "abstract" | "sig" | "one" | "lone" | "some" => self.sig().map(Paragraph::Sig),
            "fun" => {
                self.next();
                let name = self.name()?;
                self.expect_sym("[")?;
                let params = self.decls_until("]")?;
                self.expect_sym("]")?;
                self.expect_sym(":")?;
                let result_mult = self.mult_prefix();
                let result = self.expr(super::printer::P_UNION)?;
                let body = self.block()?;
                Ok(Paragraph::Fun(FunDecl {
                    name,
                    params,
                    result_mult,
                    result,
                    body,
                }))
            }
            "pred" => {
                self.next();
                let name = self.name()?;
                self.expect_sym("[")?;
                let params = self.decls_until("]")?;
                self.expect_sym("]")?;
                let body = self.block()?;
                Ok(Paragraph::Pred(PredDecl { name, params, body }))
            }
            "fact" => {
                self.next();
                let name = if self.is_sym("{") { None } else { Some(self.name()?) };
                let body = self.block()?;
                Ok(Paragraph::Fact(FactDecl { name, body }))
            }
            "assert" => {
                self.next();
                let name = self.name()?;
                let body = self.block()?;
                Ok(Paragraph::Assert(AssertDecl { name, body }))
            }
            "check" => {
                self.next();
                let assertion = self.name()?;
                let mut bounds = Vec::new();
                let mut bitwidth = DEFAULT_BITWIDTH;
                if self.eat_word("for") {
                    loop {
                        let exact = self.eat_word("exactly");
                        let n = self.int()?;
                        let sig = match self.next() {
                            Tok::Word(w) => w,
                            other => return self.error(format!("expected a signature, found {other:?}")),
                        };
                        if sig == "Int" && !exact {
                            bitwidth = n as u32;
                        } else if exact {
                            bounds.push((sig, n as u32));
                        } else {
                            return self.error("only exact bounds are supported");
                        }
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                Ok(Paragraph::Check(CheckCmd {
                    assertion,
                    bounds,
                    bitwidth,
                }))
            }
            other => self.error(format!("unexpected '{other}' at paragraph level")),
        }
    }

    fn sig(&mut self) -> R<SigDecl> {
        let is_abstract = self.eat_word("abstract");
        let mult = self.mult_prefix();
        self.expect_word("sig")?;
        let mut names = vec![self.name()?];
        while self.eat_sym(",") {
            names.push(self.name()?);
        }
        let extends = if self.eat_word("extends") {
            Some(self.name()?)
        } else {
            None
        };
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.is_sym("}") {
            let name = self.name()?;
            self.expect_sym(":")?;
            let bound = self.expr(super::printer::P_UNION)?;
            fields.push(FieldDecl { name, bound });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(SigDecl {
            names,
            is_abstract,
            mult,
            extends,
            fields,
        })
    }

    fn mult_prefix(&mut self) -> Option<Mult> {
        let m = match self.peek() {
            Tok::Word(w) => mult_of(w),
            _ => None,
        };
        if m.is_some() {
            self.next();
        }
        m
    }

    /// `a, b : [mult] e, c : e ...`, stopping before `close` or `|`.
    fn decls_until(&mut self, close: &str) -> R<Vec<Decl>> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            let mut names = vec![self.name()?];
            while self.eat_sym(",") {
                names.push(self.name()?);
            }
            self.expect_sym(":")?;
            let mult = self.mult_prefix();
            let bound = self.expr(super::printer::P_UNION)?;
            out.push(Decl { names, mult, bound });
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(out)
    }

    fn block(&mut self) -> R<AlloyExpr> {
        self.expect_sym("{")?;
        let mut items = Vec::new();
        loop {
            match &self.toks[self.at].tok {
                Tok::Comment(c) => {
                    items.push(BlockItem::Comment(c.clone()));
                    self.at += 1;
                }
                Tok::Sym("}") => {
                    self.at += 1;
                    return Ok(AlloyExpr::Block(items));
                }
                Tok::Eof => return self.error("unterminated block"),
                _ => {
                    let f = self.expr(super::printer::P_QUANT)?;
                    items.push(BlockItem::Formula(f));
                }
            }
        }
    }

    fn body(&mut self) -> R<AlloyExpr> {
        if self.is_sym("{") {
            self.block()
        } else {
            self.expect_sym("|")?;
            self.expr(super::printer::P_QUANT)
        }
    }

    // ----- expressions -----

    fn expr(&mut self, min: u8) -> R<AlloyExpr> {
        use super::printer::*;
        if min == P_QUANT {
            if let Tok::Word(w) = self.peek().clone() {
                if let Some(q) = quant_of(&w) {
                    let decl_follows = self.is_name_at(1) && matches!(self.peek_n(2), Tok::Sym(":") | Tok::Sym(","));
                    if decl_follows {
                        self.next();
                        let decls = self.decls_until("|")?;
                        let body = self.body()?;
                        return Ok(AlloyExpr::Quant(q, decls, Box::new(body)));
                    }
                }
                if w == "let" {
                    self.next();
                    let mut binds = Vec::new();
                    loop {
                        let n = self.name()?;
                        self.expect_sym("=")?;
                        binds.push((n, self.expr(P_UNION)?));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    let body = self.body()?;
                    return Ok(AlloyExpr::Let(binds, Box::new(body)));
                }
            }
            return self.expr(P_OR);
        }
        match min {
            P_OR => self.left_assoc(P_OR, &[("or", BinaryOp::Or), ("||", BinaryOp::Or)]),
            P_IFF => self.left_assoc(P_IFF, &[("iff", BinaryOp::Iff)]),
            P_IMPLIES => {
                let a = self.expr(P_AND)?;
                if self.eat_word("implies") {
                    let b = self.expr(P_IMPLIES)?;
                    if self.eat_word("else") {
                        let c = self.expr(P_IMPLIES)?;
                        return Ok(AlloyExpr::if_else(a, b, c));
                    }
                    return Ok(AlloyExpr::binary(BinaryOp::Implies, a, b));
                }
                Ok(a)
            }
            P_AND => self.left_assoc(P_AND, &[("and", BinaryOp::And), ("&&", BinaryOp::And)]),
            P_NOT => {
                if self.eat_sym("!") || self.eat_word("not") {
                    let a = self.expr(P_NOT)?;
                    return Ok(AlloyExpr::negate(a));
                }
                self.expr(P_CMP)
            }
            P_CMP => {
                let a = self.expr(P_MULT)?;
                let op = match self.peek() {
                    Tok::Word(w) if w == "in" => Some(BinaryOp::In),
                    Tok::Sym("=") => Some(BinaryOp::Eq),
                    Tok::Sym("<") => Some(BinaryOp::Lt),
                    Tok::Sym("=<") => Some(BinaryOp::Le),
                    Tok::Sym(">") => Some(BinaryOp::Gt),
                    Tok::Sym(">=") => Some(BinaryOp::Ge),
                    _ => None,
                };
                match op {
                    Some(op) => {
                        self.next();
                        let b = self.expr(P_MULT)?;
                        Ok(AlloyExpr::binary(op, a, b))
                    }
                    None => Ok(a),
                }
            }
            P_MULT => {
                if let Tok::Word(w) = self.peek().clone() {
                    if let Some(q) = quant_of(&w).filter(|q| *q != Quant::All) {
                        self.next();
                        let a = self.expr(P_UNION)?;
                        return Ok(AlloyExpr::unary(UnaryOp::Mult(q), a));
                    }
                }
                self.expr(P_UNION)
            }
            P_UNION => self.left_assoc(P_UNION, &[("+", BinaryOp::Union), ("-", BinaryOp::Diff)]),
            P_INTER => self.left_assoc(P_INTER, &[("&", BinaryOp::Inter)]),
            P_ARROW => {
                let mut a = self.expr(P_RESTRICT)?;
                loop {
                    let left_mult = match (self.peek_n(0).clone(), self.peek_n(1).clone()) {
                        (Tok::Word(w), Tok::Sym("->")) if mult_of(&w).is_some() => {
                            self.next();
                            mult_of(&w)
                        }
                        (Tok::Sym("->"), _) => None,
                        _ => break,
                    };
                    self.expect_sym("->")?;
                    let right_mult = self.mult_prefix();
                    let b = self.expr(P_RESTRICT)?;
                    a = AlloyExpr::Product {
                        left: Box::new(a),
                        left_mult,
                        right_mult,
                        right: Box::new(b),
                    };
                }
                Ok(a)
            }
            P_RESTRICT => self.left_assoc(P_RESTRICT, &[("<:", BinaryOp::DomRes), (":>", BinaryOp::RanRes)]),
            P_JOIN => {
                let mut a = self.expr(P_UNARY)?;
                while self.eat_sym(".") {
                    let b = self.expr(P_UNARY)?;
                    a = AlloyExpr::join(a, b);
                }
                Ok(a)
            }
            P_UNARY => {
                if self.eat_sym("~") {
                    let a = self.expr(P_UNARY)?;
                    return Ok(AlloyExpr::unary(UnaryOp::Transpose, a));
                }
                if self.is_sym("-") && matches!(self.peek_n(1), Tok::Int(_)) {
                    self.next();
                    let v = self.int()?;
                    return Ok(AlloyExpr::Int(-v));
                }
                self.atom()
            }
            _ => unreachable!("no precedence level {min}"),
        }
    }

    fn left_assoc(&mut self, level: u8, ops: &[(&str, BinaryOp)]) -> R<AlloyExpr> {
        let mut a = self.expr(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Word(w) => ops.iter().find(|(t, _)| t == w).map(|(_, o)| *o),
                Tok::Sym(s) => ops.iter().find(|(t, _)| t == s).map(|(_, o)| *o),
                _ => None,
            };
            let Some(op) = op else { return Ok(a) };
            self.next();
            let b = self.expr(level + 1)?;
            a = AlloyExpr::binary(op, a, b);
        }
    }

    fn atom(&mut self) -> R<AlloyExpr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(AlloyExpr::Int(v))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr(super::printer::P_QUANT)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                let comprehension = self.is_name_at(1) && matches!(self.peek_n(2), Tok::Sym(":") | Tok::Sym(","));
                if comprehension {
                    self.next();
                    let decls = self.decls_until("|")?;
                    self.expect_sym("|")?;
                    let body = self.expr(super::printer::P_QUANT)?;
                    self.expect_sym("}")?;
                    Ok(AlloyExpr::Comprehension(decls, Box::new(body)))
                } else {
                    self.block()
                }
            }
            Tok::Word(w) => match w.as_str() {
                "none" => {
                    self.next();
                    Ok(AlloyExpr::None)
                }
                "univ" => {
                    self.next();
                    Ok(AlloyExpr::Univ)
                }
                "iden" => {
                    self.next();
                    Ok(AlloyExpr::Iden)
                }
                _ => {
                    let n = self.name()?;
                    if self.eat_sym("[") {
                        let mut args = Vec::new();
                        if !self.is_sym("]") {
                            loop {
                                args.push(self.expr(super::printer::P_QUANT)?);
                                if !self.eat_sym(",") {
                                    break;
                                }
                            }
                        }
                        self.expect_sym("]")?;
                        return Ok(AlloyExpr::Call(n, args));
                    }
                    Ok(AlloyExpr::Name(n))
                }
            },
            other => self.error(format!("unexpected {other:?}")),
        }
    }
}

fn parser(src: &str) -> R<Parser> {
    Ok(Parser {
        toks: tokenize(src)?,
        at: 0,
    })
}

pub fn parse_module(src: &str) -> Result<AlloyModule, AlloyParseError> {
    parser(src)?.module()
}

pub fn parse_alloy_expr(src: &str) -> Result<AlloyExpr, AlloyParseError> {
    let mut p = parser(src)?;
    let e = p.expr(super::printer::P_QUANT)?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.error("trailing input");
    }
    Ok(e)
}

pub fn parse_paragraph(src: &str) -> Result<Paragraph, AlloyParseError> {
    let mut p = parser(src)?;
    let para = p.paragraph()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.error("trailing input");
    }
    Ok(para)
}
