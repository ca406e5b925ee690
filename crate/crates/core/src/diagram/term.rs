//! Term syntax for diagrams: generators combined with `;` and `*`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{compose, describe, tensor, Diagram, DiagramError};
use crate::hypergraph::{Signature, TypeId};

/// Source position, 1-based. `0:0` marks a synthesised term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind {
    Id(Vec<String>),
    Swap(String, String),
    Copy(String),
    Del(String),
    Box(String),
    Seq(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
}

impl Term {
    pub fn new(kind: TermKind) -> Term {
        Term {
            kind,
            pos: Pos::default(),
        }
    }

    pub fn at(kind: TermKind, pos: Pos) -> Term {
        Term { kind, pos }
    }

    pub fn id<S: Into<String>>(types: impl IntoIterator<Item = S>) -> Term {
        Term::new(TermKind::Id(types.into_iter().map(Into::into).collect()))
    }

    pub fn boxed(name: &str) -> Term {
        Term::new(TermKind::Box(name.into()))
    }

    pub fn seq(a: Term, b: Term) -> Term {
        let pos = a.pos;
        Term::at(TermKind::Seq(Box::new(a), Box::new(b)), pos)
    }

    pub fn par(a: Term, b: Term) -> Term {
        let pos = a.pos;
        Term::at(TermKind::Par(Box::new(a), Box::new(b)), pos)
    }

    /// Left-nested sequential composite; `None` for an empty list.
    pub fn seq_all(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::seq)
    }

    /// Left-nested parallel composite; the empty identity for an empty list.
    pub fn par_all(terms: impl IntoIterator<Item = Term>) -> Term {
        terms
            .into_iter()
            .reduce(Term::par)
            .unwrap_or_else(|| Term::id(Vec::<String>::new()))
    }

    fn precedence(&self) -> u8 {
        match self.kind {
            TermKind::Seq(..) => 0,
            TermKind::Par(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
            if t.precedence() < min {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        }
        match &self.kind {
            TermKind::Id(ts) => write!(f, "id({})", ts.join(", ")),
            TermKind::Swap(a, b) => write!(f, "swap({a}, {b})"),
            TermKind::Copy(t) => write!(f, "copy({t})"),
            TermKind::Del(t) => write!(f, "del({t})"),
            TermKind::Box(name) => f.write_str(name),
            TermKind::Seq(a, b) => {
                child(f, a, 0)?;
                f.write_str(" ; ")?;
                child(f, b, 1)
            }
            TermKind::Par(a, b) => {
                child(f, a, 1)?;
                f.write_str(" * ")?;
                child(f, b, 2)
            }
        }
    }
}

fn resolve_type(sig: &Signature, name: &str, pos: Pos) -> Result<TypeId, DiagramError> {
    sig.type_id(name).ok_or_else(|| DiagramError::UnknownIdentifier {
        pos,
        name: name.into(),
    })
}

/// Builds the normalised diagram denoted by a term.
pub fn build_from_term(sig: &Arc<Signature>, term: &Term) -> Result<Diagram, DiagramError> {
    let pos = term.pos;
    match &term.kind {
        TermKind::Id(names) => {
            let types = names
                .iter()
                .map(|n| resolve_type(sig, n, pos))
                .collect::<Result<Vec<_>, _>>()?;
            Diagram::identity(sig, &types)
        }
        TermKind::Swap(a, b) => {
            let (a, b) = (resolve_type(sig, a, pos)?, resolve_type(sig, b, pos)?);
            Diagram::swap(sig, &[a], &[b])
        }
        TermKind::Copy(t) => Diagram::copy(sig, resolve_type(sig, t, pos)?),
        TermKind::Del(t) => Diagram::del(sig, resolve_type(sig, t, pos)?),
        TermKind::Box(name) => {
            let label = sig.box_id(name).ok_or_else(|| DiagramError::UnknownIdentifier {
                pos,
                name: name.clone(),
            })?;
            Diagram::generator(sig, label)
        }
        TermKind::Seq(a, b) => {
            let (da, db) = (build_from_term(sig, a)?, build_from_term(sig, b)?);
            if da.cod() != db.dom() {
                return Err(DiagramError::Type {
                    pos: b.pos,
                    message: format!(
                        "cannot compose {} with {}",
                        describe(sig, &da.dom(), &da.cod()),
                        describe(sig, &db.dom(), &db.cod())
                    ),
                });
            }
            compose(&da, &db)
        }
        TermKind::Par(a, b) => tensor(&build_from_term(sig, a)?, &build_from_term(sig, b)?),
    }
}

/// Structural map from the distinct wires `src` onto the list `dst` (copying, deleting and
/// permuting), as a term over the given wire types.
fn structural(sig: &Signature, types: &[TypeId], src: &[usize], dst: &[usize]) -> Option<Term> {
    let name = |w: usize| String::from(sig.type_name(types[w]));
    let mut layers = Vec::new();

    let counts: Vec<usize> = src.iter().map(|w| dst.iter().filter(|d| *d == w).count()).collect();
    if counts.iter().any(|&c| c != 1) {
        let parts = src.iter().zip(&counts).map(|(&w, &c)| match c {
            0 => Term::new(TermKind::Del(name(w))),
            1 => Term::id([name(w)]),
            _ => {
                // c copies: copy ; (copy * id) ; ... keeps the newest copy leftmost
                let mut t = Term::new(TermKind::Copy(name(w)));
                for k in 2..c {
                    let rest = Term::id(vec![name(w); k - 1]);
                    t = Term::seq(t, Term::par(Term::new(TermKind::Copy(name(w))), rest));
                }
                t
            }
        });
        layers.push(Term::par_all(parts));
    }

    let mut current: Vec<usize> = src
        .iter()
        .zip(&counts)
        .flat_map(|(&w, &c)| core::iter::repeat_n(w, c))
        .collect();
    // bubble sort the expanded list into dst order using adjacent swaps
    let mut target_rank = vec![0usize; current.len()];
    {
        let mut used = vec![false; dst.len()];
        for (i, &w) in current.iter().enumerate() {
            let j = (0..dst.len()).find(|&j| !used[j] && dst[j] == w).unwrap();
            used[j] = true;
            target_rank[i] = j;
        }
    }
    let n = current.len();
    for _ in 0..n {
        let mut swapped = false;
        for i in 0..n.saturating_sub(1) {
            if target_rank[i] > target_rank[i + 1] {
                let prefix: Vec<String> = current[..i].iter().map(|&w| name(w)).collect();
                let suffix: Vec<String> = current[i + 2..].iter().map(|&w| name(w)).collect();
                let mut parts = Vec::new();
                if !prefix.is_empty() {
                    parts.push(Term::id(prefix));
                }
                parts.push(Term::new(TermKind::Swap(name(current[i]), name(current[i + 1]))));
                if !suffix.is_empty() {
                    parts.push(Term::id(suffix));
                }
                layers.push(Term::par_all(parts));
                target_rank.swap(i, i + 1);
                current.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Term::seq_all(layers)
}

/// Decompiles a diagram into a term whose build is equal to it.
pub fn to_term(d: &Diagram) -> Term {
    let canon = d.canonical();
    let c = canon.cospan();
    let g = &c.apex;
    let sig = d.signature();
    let types = g.wire_labels();
    let name = |w: usize| String::from(sig.type_name(types[w]));
    let boxes = g.boxes();

    let mut steps = Vec::new();
    let mut live: Vec<usize> = c.left.clone();
    for (i, bx) in boxes.iter().enumerate() {
        let needed_later = |w: usize| {
            c.right.contains(&w) || boxes[i + 1..].iter().any(|later| later.inputs.contains(&w))
        };
        let kept: Vec<usize> = live.iter().copied().filter(|&w| needed_later(w)).collect();
        let mut target = kept.clone();
        target.extend_from_slice(&bx.inputs);
        if let Some(t) = structural(sig, types, &live, &target) {
            steps.push(t);
        }
        let mut parts = Vec::new();
        if !kept.is_empty() {
            parts.push(Term::id(kept.iter().map(|&w| name(w)).collect::<Vec<_>>()));
        }
        parts.push(Term::boxed(&sig.box_sig(bx.label).name));
        steps.push(Term::par_all(parts));
        live = kept;
        live.extend_from_slice(&bx.outputs);
    }
    if let Some(t) = structural(sig, types, &live, &c.right) {
        steps.push(t);
    }
    Term::seq_all(steps).unwrap_or_else(|| Term::id(live.iter().map(|&w| name(w)).collect::<Vec<_>>()))
}
