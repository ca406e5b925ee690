//! The diagram description language.
//!
//! ```text
//! file    := item*
//! item    := "type" ident ("," ident)* ";"
//!          | "box" ident ":" types "->" types ";"
//!          | "diag" ident "=" (term | graph) [";"]
//! types   := [ident ("," ident)*]
//! term    := par (";" par)*
//! par     := atom (("*" | "⊗") atom)*
//! atom    := "(" term ")" | "id" "(" types ")" | "swap" "(" ident "," ident ")"
//!          | "copy" "(" ident ")" | "del" "(" ident ")" | ident
//! graph   := "graph" "{" ["in" ports ";"] app* "out" [ident ("," ident)*] ";" "}"
//! ports   := ident ":" ident ("," ident ":" ident)*
//! app     := ident "(" [ident ("," ident)*] ")" "->" [ident ("," ident)*] ";"
//! ```
//!
//! A bare identifier is a box name. `id_X`, `copy_X`, `del_X` and `swap_X_Y` are accepted as
//! short forms when they do not name a box. A `;` followed by a keyword or the end of input ends
//! the current `diag`. Comments run from `//` to the end of the line. Names must be declared
//! before use.
//!
//! In a `graph` block every wire is named once, either as an input port or as a box output, and
//! box applications must come after the wires they read. Wires never read are deleted; a wire
//! listed several times under `out` is copied.

use std::fmt::Write as _;
use std::sync::Arc;

use markov_trace::diagram::{build_from_term, to_term, Pos};
use markov_trace::hypergraph::{HypergraphError, TypeId};
use markov_trace::{Cospan, Diagram, DiagramError, Hypergraph, Signature, Term, TermKind};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: `{name}` is already declared")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: {source}")]
    Signature { pos: Pos, source: HypergraphError },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("{pos}: in diagram `{name}`: {source}")]
    Invalid {
        pos: Pos,
        name: String,
        source: DiagramError,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Semi,
    Comma,
    Colon,
    Arrow,
    Star,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Star => "`*`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: [&str; 3] = ["type", "box", "diag"];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '\'' {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '*' | '⊗' => Tok::Star,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '=' => Tok::Eq,
            '-' if chars.peek() == Some(&'>') => {
                bump(&mut chars);
                Tok::Arrow
            }
            '/' if chars.peek() == Some(&'/') => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A parsed source file: the signature and the named diagrams in declaration order.
#[derive(Debug, Clone)]
pub struct Source {
    pub signature: Arc<Signature>,
    pub diagrams: Vec<(String, Diagram)>,
}

impl Source {
    pub fn diagram(&self, name: &str) -> Option<&Diagram> {
        self.diagrams.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    sig: Signature,
    // the signature as an Arc, rebuilt lazily after declarations change it
    shared: Option<Arc<Signature>>,
    diagrams: Vec<(String, Diagram)>,
}

pub fn parse(src: &str) -> Result<Source, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        sig: Signature::new(),
        shared: None,
        diagrams: Vec::new(),
    };
    while p.peek() != &Tok::Eof {
        p.item()?;
    }
    Ok(Source {
        signature: p.shared(),
        diagrams: p.diagrams,
    })
}

/// Parses a single term against a known signature.
pub fn parse_term(sig: &Signature, src: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        sig: sig.clone(),
        shared: None,
        diagrams: Vec::new(),
    };
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.fail(&tok.describe())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.next().1;
                Ok((s, pos))
            }
            _ => self.fail("an identifier"),
        }
    }

    fn at_keyword(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if KEYWORDS.contains(&s.as_str()))
    }

    fn shared(&mut self) -> Arc<Signature> {
        self.shared
            .get_or_insert_with(|| Arc::new(self.sig.clone()))
            .clone()
    }

    fn item(&mut self) -> Result<(), ParseError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Ident(k) if k == "type" => {
                loop {
                    let (name, pos) = self.ident()?;
                    if self.sig.type_id(&name).is_some() {
                        return Err(ParseError::Duplicate { pos, name });
                    }
                    self.sig
                        .add_type(&name)
                        .map_err(|source| ParseError::Signature { pos, source })?;
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.shared = None;
                self.expect(Tok::Semi)?;
            }
            Tok::Ident(k) if k == "box" => {
                let (name, pos) = self.ident()?;
                if self.sig.box_id(&name).is_some() {
                    return Err(ParseError::Duplicate { pos, name });
                }
                self.expect(Tok::Colon)?;
                let ins = self.type_list(&[Tok::Arrow])?;
                self.expect(Tok::Arrow)?;
                let outs = self.type_list(&[Tok::Semi])?;
                self.expect(Tok::Semi)?;
                self.sig
                    .add_box(&name, &ins, &outs)
                    .map_err(|source| ParseError::Signature { pos, source })?;
                self.shared = None;
            }
            Tok::Ident(k) if k == "diag" => {
                let (name, pos) = self.ident()?;
                if self.diagrams.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::Duplicate { pos, name });
                }
                self.expect(Tok::Eq)?;
                let d = if matches!(self.peek(), Tok::Ident(s) if s == "graph") {
                    self.graph(&name)?
                } else {
                    let t = self.term()?;
                    build_from_term(&self.shared(), &t)?
                };
                self.eat(&Tok::Semi);
                self.diagrams.push((name, d));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!("expected `type`, `box` or `diag`, found {}", other.describe()),
                })
            }
        }
        Ok(())
    }

    /// Possibly empty comma separated type names, ending before one of `stop`.
    fn type_list(&mut self, stop: &[Tok]) -> Result<Vec<TypeId>, ParseError> {
        let mut out = Vec::new();
        if stop.contains(self.peek()) {
            return Ok(out);
        }
        loop {
            let (name, pos) = self.ident()?;
            out.push(self.resolve_type(&name, pos)?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn resolve_type(&self, name: &str, pos: Pos) -> Result<TypeId, ParseError> {
        self.sig.type_id(name).ok_or_else(|| {
            DiagramError::UnknownIdentifier {
                pos,
                name: name.into(),
            }
            .into()
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.par()?;
        while *self.peek() == Tok::Semi {
            let after = &self.toks[self.at + 1].0;
            let ends = matches!(after, Tok::Eof | Tok::RParen | Tok::RBrace)
                || matches!(after, Tok::Ident(s) if KEYWORDS.contains(&s.as_str()));
            if ends {
                break;
            }
            self.next();
            t = Term::seq(t, self.par()?);
        }
        Ok(t)
    }

    fn par(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.eat(&Tok::Star) {
            t = Term::par(t, self.atom()?);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.at_keyword() {
            return self.fail("a term");
        }
        let pos = self.pos();
        match self.next().0 {
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) => self.named_atom(name, pos),
            _ => {
                self.at -= 1;
                self.fail("a term")
            }
        }
    }

    fn named_atom(&mut self, name: String, pos: Pos) -> Result<Term, ParseError> {
        let structural = ["id", "swap", "copy", "del"];
        if structural.contains(&name.as_str()) && *self.peek() == Tok::LParen {
            self.next();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.ident()?.0);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            let arity_error = |want: &str| ParseError::Syntax {
                pos,
                message: format!("`{name}` takes {want}"),
            };
            let kind = match (name.as_str(), args.len()) {
                ("id", _) => TermKind::Id(args),
                ("swap", 2) => TermKind::Swap(args[0].clone(), args[1].clone()),
                ("copy", 1) => TermKind::Copy(args.pop().unwrap()),
                ("del", 1) => TermKind::Del(args.pop().unwrap()),
                ("swap", _) => return Err(arity_error("two types")),
                _ => return Err(arity_error("one type")),
            };
            return Ok(Term::at(kind, pos));
        }
        if self.sig.box_id(&name).is_none() {
            if let Some(kind) = self.short_form(&name) {
                return Ok(Term::at(kind, pos));
            }
        }
        Ok(Term::at(TermKind::Box(name), pos))
    }

    fn short_form(&self, name: &str) -> Option<TermKind> {
        let known = |t: &str| self.sig.type_id(t).is_some();
        if let Some(t) = name.strip_prefix("id_").filter(|t| known(t)) {
            return Some(TermKind::Id(vec![t.into()]));
        }
        if let Some(t) = name.strip_prefix("copy_").filter(|t| known(t)) {
            return Some(TermKind::Copy(t.into()));
        }
        if let Some(t) = name.strip_prefix("del_").filter(|t| known(t)) {
            return Some(TermKind::Del(t.into()));
        }
        let rest = name.strip_prefix("swap_")?;
        rest.match_indices('_')
            .map(|(i, _)| (&rest[..i], &rest[i + 1..]))
            .find(|(a, b)| known(a) && known(b))
            .map(|(a, b)| TermKind::Swap(a.into(), b.into()))
    }

    fn graph(&mut self, diag: &str) -> Result<Diagram, ParseError> {
        let start = self.next().1;
        self.expect(Tok::LBrace)?;
        let sig = self.shared();
        let mut g = Hypergraph::empty(sig.clone());
        let mut names: Vec<(String, usize)> = Vec::new();
        let lookup = |names: &[(String, usize)], name: &str, pos: Pos| {
            names
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, w)| w)
                .ok_or_else(|| ParseError::from(DiagramError::UnknownIdentifier { pos, name: name.into() }))
        };
        let bind = |names: &mut Vec<(String, usize)>, name: String, w: usize, pos: Pos| {
            if names.iter().any(|(n, _)| *n == name) {
                return Err(ParseError::Duplicate { pos, name });
            }
            names.push((name, w));
            Ok(())
        };
        let mut left = Vec::new();
        if matches!(self.peek(), Tok::Ident(s) if s == "in") {
            self.next();
            if *self.peek() != Tok::Semi {
                loop {
                    let (name, pos) = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let (ty, tpos) = self.ident()?;
                    let w = g.add_wire(self.resolve_type(&ty, tpos)?).expect("type resolved");
                    bind(&mut names, name, w, pos)?;
                    left.push(w);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::Semi)?;
        }
        loop {
            let (name, pos) = self.ident()?;
            if name == "out" && *self.peek() != Tok::LParen {
                break;
            }
            let label = sig.box_id(&name).ok_or_else(|| DiagramError::UnknownIdentifier {
                pos,
                name: name.clone(),
            })?;
            self.expect(Tok::LParen)?;
            let mut ins = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    let (w, wpos) = self.ident()?;
                    ins.push(lookup(&names, &w, wpos)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            let mut outs = Vec::new();
            let decl = sig.box_sig(label);
            if *self.peek() != Tok::Semi {
                loop {
                    let (w, wpos) = self.ident()?;
                    let Some(&ty) = decl.outputs.get(outs.len()) else {
                        return Err(ParseError::Syntax {
                            pos: wpos,
                            message: format!("`{name}` has only {} outputs", decl.outputs.len()),
                        });
                    };
                    let id = g.add_wire(ty).expect("declared type");
                    bind(&mut names, w, id, wpos)?;
                    outs.push(id);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::Semi)?;
            if outs.len() != decl.outputs.len() {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!("`{name}` has {} outputs, {} named", decl.outputs.len(), outs.len()),
                });
            }
            g.add_box(label, ins, outs).map_err(|e| ParseError::Invalid {
                pos,
                name: diag.into(),
                source: e.into(),
            })?;
        }
        let mut right = Vec::new();
        if *self.peek() != Tok::Semi {
            loop {
                let (w, wpos) = self.ident()?;
                right.push(lookup(&names, &w, wpos)?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        let invalid = |source: DiagramError| ParseError::Invalid {
            pos: start,
            name: diag.into(),
            source,
        };
        let c = Cospan::new(g, left, right).map_err(|e| invalid(e.into()))?;
        Diagram::normalize(c).map_err(invalid)
    }
}

fn list(sig: &Signature, types: &[TypeId]) -> String {
    types.iter().map(|&t| sig.type_name(t)).collect::<Vec<_>>().join(", ")
}

/// Prints the signature declarations.
pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for t in sig.types() {
        writeln!(out, "type {t};").unwrap();
    }
    for b in sig.boxes() {
        let (ins, outs) = (list(sig, &b.inputs), list(sig, &b.outputs));
        let arrow = match (ins.is_empty(), outs.is_empty()) {
            (true, true) => "->".to_string(),
            (true, false) => format!("-> {outs}"),
            (false, true) => format!("{ins} ->"),
            (false, false) => format!("{ins} -> {outs}"),
        };
        writeln!(out, "box {} : {arrow};", b.name).unwrap();
    }
    out
}

/// Prints a self-contained source file declaring `sig` and the given diagrams.
pub fn print_source<'a>(sig: &Signature, diagrams: impl IntoIterator<Item = (&'a str, &'a Diagram)>) -> String {
    let mut out = print_signature(sig);
    for (name, d) in diagrams {
        writeln!(out, "\ndiag {name} = {};", to_term(d)).unwrap();
    }
    out
}

/// The wire-level form of a diagram, in canonical numbering.
pub fn print_graph(d: &Diagram) -> String {
    let d = d.canonical();
    let c = d.cospan();
    let sig = d.signature();
    let g = &c.apex;
    let wire = |w: usize| format!("w{w}");
    let mut out = String::from("graph {\n  in ");
    let ports: Vec<String> = c
        .left
        .iter()
        .map(|&w| format!("{} : {}", wire(w), sig.type_name(g.wire_label(w))))
        .collect();
    out.push_str(&ports.join(", "));
    out.push_str(";\n");
    for b in g.boxes() {
        let ins: Vec<String> = b.inputs.iter().map(|&w| wire(w)).collect();
        let outs: Vec<String> = b.outputs.iter().map(|&w| wire(w)).collect();
        writeln!(out, "  {}({}) -> {};", sig.box_sig(b.label).name, ins.join(", "), outs.join(", ")).unwrap();
    }
    let outs: Vec<String> = c.right.iter().map(|&w| wire(w)).collect();
    writeln!(out, "  out {};\n}}", outs.join(", ")).unwrap();
    out
}
