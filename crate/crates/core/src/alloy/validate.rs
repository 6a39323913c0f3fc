use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::ast::*;

/// Names every module may use without declaring them.
pub const BUILTIN_NAMES: &[&str] = &[
    "Int",
    "ord/first",
    "ord/last",
    "ord/next",
    "ord/prev",
    "plus",
    "minus",
    "mul",
    "div",
    "rem",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModuleDiagnosticKind {
    Duplicate,
    Unresolved,
    MissingBound,
    UnknownBound,
    UnknownAssertion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDiagnostic {
    pub kind: ModuleDiagnosticKind,
    pub message: String,
}

impl fmt::Display for ModuleDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

struct Resolver<'a> {
    globals: HashSet<&'a str>,
    locals: Vec<&'a str>,
    out: Vec<ModuleDiagnostic>,
    context: String,
}

impl<'a> Resolver<'a> {
    fn known(&self, n: &str) -> bool {
        self.locals.contains(&n) || self.globals.contains(n) || BUILTIN_NAMES.contains(&n)
    }

    fn name(&mut self, n: &str) {
        if !self.known(n) {
            self.out.push(ModuleDiagnostic {
                kind: ModuleDiagnosticKind::Unresolved,
                message: format!("unresolved name '{n}' in {}", self.context),
            });
        }
    }

    fn decls(&mut self, decls: &'a [Decl]) {
        for d in decls {
            self.expr(&d.bound);
            self.locals.extend(d.names.iter().map(String::as_str));
        }
    }

    fn expr(&mut self, e: &'a AlloyExpr) {
        match e {
            AlloyExpr::Name(n) => self.name(n),
            AlloyExpr::Int(_) | AlloyExpr::None | AlloyExpr::Univ | AlloyExpr::Iden => {}
            AlloyExpr::Unary(_, a) => self.expr(a),
            AlloyExpr::Binary(_, a, b) => {
                self.expr(a);
                self.expr(b);
            }
            AlloyExpr::Product { left, right, .. } => {
                self.expr(left);
                self.expr(right);
            }
            AlloyExpr::IfElse(a, b, c) => {
                self.expr(a);
                self.expr(b);
                self.expr(c);
            }
            AlloyExpr::Call(f, args) => {
                self.name(f);
                args.iter().for_each(|a| self.expr(a));
            }
            AlloyExpr::Quant(_, decls, body) | AlloyExpr::Comprehension(decls, body) => {
                let depth = self.locals.len();
                self.decls(decls);
                self.expr(body);
                self.locals.truncate(depth);
            }
            AlloyExpr::Let(binds, body) => {
                let depth = self.locals.len();
                for (n, v) in binds {
                    self.expr(v);
                    self.locals.push(n);
                }
                self.expr(body);
                self.locals.truncate(depth);
            }
            AlloyExpr::Block(items) => {
                for f in AlloyExpr::block_formulas(items) {
                    self.expr(f);
                }
            }
        }
    }
}

/// Name resolution, uniqueness of top-level names, and coverage of the
/// check bounds. An empty list means the module is well formed.
pub fn validate_module(m: &AlloyModule) -> Vec<ModuleDiagnostic> {
    let mut out = Vec::new();
    let mut declared: Vec<&str> = Vec::new();
    let mut fields: BTreeSet<&str> = BTreeSet::new();
    for p in &m.paragraphs {
        match p {
            Paragraph::Sig(s) => {
                declared.extend(s.names.iter().map(String::as_str));
                fields.extend(s.fields.iter().map(|f| f.name.as_str()));
            }
            Paragraph::Fun(f) => declared.push(&f.name),
            Paragraph::Pred(f) => declared.push(&f.name),
            Paragraph::Fact(f) => declared.extend(f.name.as_deref()),
            Paragraph::Assert(a) => declared.push(&a.name),
            Paragraph::Comment(_) | Paragraph::Check(_) => {}
        }
    }
    let mut top: HashSet<&str> = HashSet::new();
    for name in declared {
        if !top.insert(name) {
            out.push(ModuleDiagnostic {
                kind: ModuleDiagnosticKind::Duplicate,
                message: format!("duplicate declaration of '{name}'"),
            });
        }
    }
    for s in m.sigs() {
        let mut names = HashSet::new();
        for f in &s.fields {
            if !names.insert(&f.name) {
                out.push(ModuleDiagnostic {
                    kind: ModuleDiagnosticKind::Duplicate,
                    message: format!("duplicate field '{}' in sig {}", f.name, s.names[0]),
                });
            }
        }
    }

    let mut r = Resolver {
        globals: top.iter().copied().chain(fields.iter().copied()).collect(),
        locals: Vec::new(),
        out: Vec::new(),
        context: String::new(),
    };
    for o in &m.opens {
        for a in &o.args {
            r.context = format!("open {}", o.path);
            r.name(a);
        }
    }
    for p in &m.paragraphs {
        match p {
            Paragraph::Sig(s) => {
                r.context = format!("sig {}", s.names[0]);
                if let Some(parent) = &s.extends {
                    r.name(parent);
                }
                for f in &s.fields {
                    r.expr(&f.bound);
                }
            }
            Paragraph::Fun(f) => {
                r.context = format!("fun {}", f.name);
                r.decls(&f.params);
                r.expr(&f.result);
                r.expr(&f.body);
                r.locals.clear();
            }
            Paragraph::Pred(f) => {
                r.context = format!("pred {}", f.name);
                r.decls(&f.params);
                r.expr(&f.body);
                r.locals.clear();
            }
            Paragraph::Fact(f) => {
                r.context = format!("fact {}", f.name.as_deref().unwrap_or("(anonymous)"));
                r.expr(&f.body);
            }
            Paragraph::Assert(a) => {
                r.context = format!("assert {}", a.name);
                r.expr(&a.body);
            }
            Paragraph::Comment(_) | Paragraph::Check(_) => {}
        }
    }
    out.append(&mut r.out);

    // Signatures that need an explicit bound: top-level, not `one`, not
    // abstract parents of enumerations.
    let parents: HashSet<&str> = m.sigs().filter_map(|s| s.extends.as_deref()).collect();
    let needs_bound: Vec<&str> = m
        .sigs()
        .filter(|s| s.extends.is_none() && s.mult.is_none())
        .flat_map(|s| s.names.iter().map(String::as_str))
        .filter(|n| !parents.contains(n))
        .collect();
    let all_sigs: HashSet<&str> = m.sig_names().collect();
    for c in m.checks() {
        if m.asserts().all(|a| a.name != c.assertion) {
            out.push(ModuleDiagnostic {
                kind: ModuleDiagnosticKind::UnknownAssertion,
                message: format!("check refers to unknown assertion '{}'", c.assertion),
            });
        }
        for (s, _) in &c.bounds {
            if !all_sigs.contains(s.as_str()) {
                out.push(ModuleDiagnostic {
                    kind: ModuleDiagnosticKind::UnknownBound,
                    message: format!("bound for unknown signature '{s}'"),
                });
            }
        }
        for n in &needs_bound {
            if c.bounds.iter().all(|(s, _)| s != n) {
                out.push(ModuleDiagnostic {
                    kind: ModuleDiagnosticKind::MissingBound,
                    message: format!("check {} has no bound for '{n}'", c.assertion),
                });
            }
        }
    }
    out
}
