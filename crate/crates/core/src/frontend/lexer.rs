use super::ast::Pos;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Kw(Kw),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Machine,
    Sees,
    Variables,
    Invariants,
    Initialisation,
    Event,
    Guards,
    Actions,
    End,
    Context,
    Sets,
    Enum,
    Constants,
    Axioms,
    Dom,
    Ran,
    Prj1,
    Prj2,
    Id,
    Mod,
    Or,
    Not,
    Forall,
    Exists,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("MACHINE", Kw::Machine),
    ("SEES", Kw::Sees),
    ("VARIABLES", Kw::Variables),
    ("INVARIANTS", Kw::Invariants),
    ("INITIALISATION", Kw::Initialisation),
    ("EVENT", Kw::Event),
    ("GUARDS", Kw::Guards),
    ("ACTIONS", Kw::Actions),
    ("END", Kw::End),
    ("CONTEXT", Kw::Context),
    ("SETS", Kw::Sets),
    ("ENUM", Kw::Enum),
    ("CONSTANTS", Kw::Constants),
    ("AXIOMS", Kw::Axioms),
    ("dom", Kw::Dom),
    ("ran", Kw::Ran),
    ("prj1", Kw::Prj1),
    ("prj2", Kw::Prj2),
    ("id", Kw::Id),
    ("mod", Kw::Mod),
    ("or", Kw::Or),
    ("not", Kw::Not),
    ("forall", Kw::Forall),
    ("exists", Kw::Exists),
];

pub fn keyword_text(kw: Kw) -> &'static str {
    KEYWORDS.iter().find(|(_, k)| *k == kw).map(|(s, _)| *s).unwrap_or("?")
}

// Longest match first.
const SYMBOLS: &[&str] = &[
    "<<|", "|>>", "<->", "-->", "+->", "->>", "+>>", ">->", "|->", "\\/", "/\\", "<|", "|>", "/:", "<:", "/=", ":=",
    "::", ":|", "=>", "<=", ">=", "\\", ":", "=", "<", ">", "+", "-", "*", "/", "^", "&", ".", ",", ";", "(", ")", "{",
    "}",
];

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
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
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            col += (i - start) as u32;
            let tok = match KEYWORDS.iter().find(|(s, _)| *s == word) {
                Some((_, kw)) => Tok::Kw(*kw),
                None => Tok::Ident(word.to_string()),
            };
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            col += (i - start) as u32;
            let v: i64 = text
                .parse()
                .map_err(|_| ParseError::new(pos, "integer literal out of range"))?;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len() as u32;
                out.push(Token {
                    tok: Tok::Sym(sym),
                    pos,
                });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(pos, format!("unknown operator token '{ch}'")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_match_on_arrows() {
        assert_eq!(
            toks("{p} <<| H |>> S"),
            vec![
                Tok::Sym("{"),
                Tok::Ident("p".into()),
                Tok::Sym("}"),
                Tok::Sym("<<|"),
                Tok::Ident("H".into()),
                Tok::Sym("|>>"),
                Tok::Ident("S".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("a-->b")[1], Tok::Sym("-->"));
        assert_eq!(toks("a - b")[1], Tok::Sym("-"));
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("x // note\n  dom").unwrap();
        assert_eq!(t[1].tok, Tok::Kw(Kw::Dom));
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn rejects_unknown_character() {
        let e = tokenize("a ? b").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 3 });
    }
}
