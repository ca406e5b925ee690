//! Markov string diagrams: validated cospans of hypergraphs, the morphisms of a free Markov
//! category.
//!
//! A cospan is a diagram when it is acyclic, left monogamous (every wire has exactly one source:
//! an input boundary port or a box output) and has no eliminable boxes (boxes none of whose
//! outputs reach the output boundary or another box). Composition glues by pushout and then
//! normalises; the tensor is the coproduct. Two diagrams are equal when their cospans are
//! isomorphic, decided by [`Diagram::canonical_form`].

mod canon;
mod term;

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::hypergraph::{BoxLabel, Cospan, Hypergraph, HypergraphError, Signature, TypeId};

pub use canon::Canonical;
pub use term::{build_from_term, to_term, Pos, Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("diagram contains a cycle through box {box_id}")]
    Cyclic { box_id: usize },
    #[error("wire {wire} has {sources} sources, left monogamy requires exactly one")]
    NotLeftMonogamous { wire: usize, sources: usize },
    #[error("box {box_id} is eliminable: none of its outputs are used")]
    EliminableBox { box_id: usize },
    #[error("boundary mismatch: expected [{expected}], found [{found}]")]
    BoundaryMismatch { expected: String, found: String },
    #[error("{pos}: unknown identifier `{name}`")]
    UnknownIdentifier { pos: Pos, name: String },
    #[error("{pos}: type error: {message}")]
    Type { pos: Pos, message: String },
}

/// An isomorphism class of Markov string diagrams, represented by one of its cospans.
#[derive(Debug, Clone)]
pub struct Diagram {
    cospan: Cospan,
}

impl Diagram {
    /// Checks all diagram conditions without changing the cospan.
    pub fn validate(c: Cospan) -> Result<Diagram, DiagramError> {
        check_left_monogamy(&c)?;
        check_acyclic(&c)?;
        if let Some(&b) = eliminable_boxes(&c).first() {
            return Err(DiagramError::EliminableBox { box_id: b });
        }
        Ok(Diagram { cospan: c })
    }

    /// Removes eliminable boxes (and their output wires) until none remain.
    pub fn normalize(c: Cospan) -> Result<Diagram, DiagramError> {
        check_left_monogamy(&c)?;
        let order = topological_boxes(&c)?;
        let g = &c.apex;
        let mut consumers = vec![0usize; g.num_wires()];
        for b in g.boxes() {
            for &w in &b.inputs {
                consumers[w] += 1;
            }
        }
        let mut on_right = vec![false; g.num_wires()];
        for &w in &c.right {
            on_right[w] = true;
        }
        let mut removed = vec![false; g.num_boxes()];
        // one reverse-topological sweep reaches the fixpoint: removing a box only frees its
        // predecessors, which come later in this iteration
        for &b in order.iter().rev() {
            let bx = g.hyperbox(b);
            if bx.outputs.iter().all(|&w| !on_right[w] && consumers[w] == 0) {
                removed[b] = true;
                for &w in &bx.inputs {
                    consumers[w] -= 1;
                }
            }
        }
        let mut dropped = vec![false; g.num_wires()];
        for (b, bx) in g.boxes().iter().enumerate() {
            if removed[b] {
                for &w in &bx.outputs {
                    dropped[w] = true;
                }
            }
        }
        let wires: Vec<usize> = (0..g.num_wires()).filter(|&w| !dropped[w]).collect();
        let boxes: Vec<usize> = (0..g.num_boxes()).filter(|&b| !removed[b]).collect();
        let (apex, map) = g.restrict(&wires, &boxes);
        let remap = |ws: &[usize]| -> Vec<usize> { ws.iter().map(|&w| map[w].unwrap()).collect() };
        let left = remap(&c.left);
        let right = remap(&c.right);
        Diagram::validate(Cospan::new(apex, left, right)?)
    }

    pub fn cospan(&self) -> &Cospan {
        &self.cospan
    }

    pub fn into_cospan(self) -> Cospan {
        self.cospan
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.cospan.signature()
    }

    pub fn dom(&self) -> Vec<TypeId> {
        self.cospan.dom_types()
    }

    pub fn cod(&self) -> Vec<TypeId> {
        self.cospan.cod_types()
    }

    pub fn num_boxes(&self) -> usize {
        self.cospan.apex.num_boxes()
    }

    pub fn num_wires(&self) -> usize {
        self.cospan.apex.num_wires()
    }

    pub fn identity(sig: &Arc<Signature>, types: &[TypeId]) -> Result<Diagram, DiagramError> {
        let apex = Hypergraph::discrete(sig.clone(), types)?;
        let ids: Vec<usize> = (0..types.len()).collect();
        Diagram::validate(Cospan::new(apex, ids.clone(), ids)?)
    }

    /// The symmetry `a ⊗ b -> b ⊗ a` for type lists `a` and `b`.
    pub fn swap(sig: &Arc<Signature>, a: &[TypeId], b: &[TypeId]) -> Result<Diagram, DiagramError> {
        let mut types = a.to_vec();
        types.extend_from_slice(b);
        let apex = Hypergraph::discrete(sig.clone(), &types)?;
        let left: Vec<usize> = (0..types.len()).collect();
        let right: Vec<usize> = (a.len()..types.len()).chain(0..a.len()).collect();
        Diagram::validate(Cospan::new(apex, left, right)?)
    }

    /// One wire hit twice by the output boundary.
    pub fn copy(sig: &Arc<Signature>, t: TypeId) -> Result<Diagram, DiagramError> {
        let apex = Hypergraph::discrete(sig.clone(), &[t])?;
        Diagram::validate(Cospan::new(apex, vec![0], vec![0, 0])?)
    }

    /// One wire with no output attachment.
    pub fn del(sig: &Arc<Signature>, t: TypeId) -> Result<Diagram, DiagramError> {
        let apex = Hypergraph::discrete(sig.clone(), &[t])?;
        Diagram::validate(Cospan::new(apex, vec![0], Vec::new())?)
    }

    /// Deletes a whole type list.
    pub fn discard(sig: &Arc<Signature>, types: &[TypeId]) -> Result<Diagram, DiagramError> {
        let apex = Hypergraph::discrete(sig.clone(), types)?;
        Diagram::validate(Cospan::new(apex, (0..types.len()).collect(), Vec::new())?)
    }

    /// The diagram consisting of a single box.
    pub fn generator(sig: &Arc<Signature>, label: BoxLabel) -> Result<Diagram, DiagramError> {
        if label >= sig.num_boxes() {
            return Err(HypergraphError::UnknownLabel(label).into());
        }
        let decl = sig.box_sig(label);
        let mut g = Hypergraph::empty(sig.clone());
        let ins = decl
            .inputs
            .iter()
            .map(|&t| g.add_wire(t))
            .collect::<Result<Vec<_>, _>>()?;
        let outs = decl
            .outputs
            .iter()
            .map(|&t| g.add_wire(t))
            .collect::<Result<Vec<_>, _>>()?;
        g.add_box(label, ins.clone(), outs.clone())?;
        Diagram::normalize(Cospan::new(g, ins, outs)?)
    }

    pub fn generator_named(sig: &Arc<Signature>, name: &str) -> Result<Diagram, DiagramError> {
        let label = sig.box_id(name).ok_or_else(|| DiagramError::UnknownIdentifier {
            pos: Pos::default(),
            name: name.into(),
        })?;
        Self::generator(sig, label)
    }

    /// Sequential composition `self ; other`.
    pub fn then(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        compose(self, other)
    }

    pub fn tensor(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        tensor(self, other)
    }

    /// Canonical byte string: equal iff the cospans are isomorphic.
    pub fn canonical_form(&self) -> Vec<u8> {
        canon::canonicalize(&self.cospan).bytes
    }

    /// The canonical representative of this isomorphism class.
    pub fn canonical(&self) -> Diagram {
        Diagram {
            cospan: canon::canonicalize(&self.cospan).relabel(&self.cospan),
        }
    }

    pub fn equal(&self, other: &Diagram) -> bool {
        crate::hypergraph::same_signature(self.signature(), other.signature())
            && self.canonical_form() == other.canonical_form()
    }

    /// Renders a type list with signature names.
    pub fn type_list(&self, types: &[TypeId]) -> String {
        type_list(self.signature(), types)
    }
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.equal(other)
    }
}

impl Eq for Diagram {}

pub(crate) fn type_list(sig: &Signature, types: &[TypeId]) -> String {
    let names: Vec<&str> = types.iter().map(|&t| sig.type_name(t)).collect();
    names.join(", ")
}

fn boundary_mismatch(sig: &Signature, expected: &[TypeId], found: &[TypeId]) -> DiagramError {
    DiagramError::BoundaryMismatch {
        expected: type_list(sig, expected),
        found: type_list(sig, found),
    }
}

/// `f ; g`: glue the outputs of `f` to the inputs of `g`, then normalise.
pub fn compose(f: &Diagram, g: &Diagram) -> Result<Diagram, DiagramError> {
    let (fc, gc) = (&f.cospan, &g.cospan);
    if fc.cod_types() != gc.dom_types() {
        return Err(boundary_mismatch(f.signature(), &fc.cod_types(), &gc.dom_types()));
    }
    let (apex, fa, ga) = Hypergraph::pushout(&fc.apex, &fc.right, &gc.apex, &gc.left)?;
    let left = fc.left.iter().map(|&w| fa.wires[w]).collect();
    let right = gc.right.iter().map(|&w| ga.wires[w]).collect();
    Diagram::normalize(Cospan::new(apex, left, right)?)
}

pub fn tensor(f: &Diagram, g: &Diagram) -> Result<Diagram, DiagramError> {
    let (fc, gc) = (&f.cospan, &g.cospan);
    let (apex, fa, ga) = Hypergraph::coproduct(&fc.apex, &gc.apex)?;
    let left = fc
        .left
        .iter()
        .map(|&w| fa.wires[w])
        .chain(gc.left.iter().map(|&w| ga.wires[w]))
        .collect();
    let right = fc
        .right
        .iter()
        .map(|&w| fa.wires[w])
        .chain(gc.right.iter().map(|&w| ga.wires[w]))
        .collect();
    Diagram::validate(Cospan::new(apex, left, right)?)
}

/// Number of sources of each wire: input boundary attachments plus box outputs.
pub fn wire_sources(c: &Cospan) -> Vec<usize> {
    let mut sources = vec![0usize; c.apex.num_wires()];
    for &w in &c.left {
        sources[w] += 1;
    }
    for b in c.apex.boxes() {
        for &w in &b.outputs {
            sources[w] += 1;
        }
    }
    sources
}

pub fn check_left_monogamy(c: &Cospan) -> Result<(), DiagramError> {
    match wire_sources(c).iter().position(|&s| s != 1) {
        Some(wire) => Err(DiagramError::NotLeftMonogamous {
            wire,
            sources: wire_sources(c)[wire],
        }),
        None => Ok(()),
    }
}

pub fn check_acyclic(c: &Cospan) -> Result<(), DiagramError> {
    topological_boxes(c).map(|_| ())
}

/// Boxes in a topological order (Kahn's algorithm, smallest index first among ready boxes).
pub fn topological_boxes(c: &Cospan) -> Result<Vec<usize>, DiagramError> {
    let g = &c.apex;
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); g.num_wires()];
    for (b, bx) in g.boxes().iter().enumerate() {
        for &w in &bx.inputs {
            consumers[w].push(b);
        }
    }
    let mut producers: Vec<Vec<usize>> = vec![Vec::new(); g.num_wires()];
    for (b, bx) in g.boxes().iter().enumerate() {
        for &w in &bx.outputs {
            producers[w].push(b);
        }
    }
    // indegree counts port attachments, so a box reading one wire twice waits for both
    let mut indegree: Vec<usize> = g
        .boxes()
        .iter()
        .map(|bx| bx.inputs.iter().map(|&w| producers[w].len()).sum())
        .collect();
    let mut ready: VecDeque<usize> = (0..g.num_boxes()).filter(|&b| indegree[b] == 0).collect();
    let mut order = Vec::with_capacity(g.num_boxes());
    while let Some(b) = ready.pop_front() {
        order.push(b);
        for &w in &g.hyperbox(b).outputs {
            for &next in &consumers[w] {
                indegree[next] -= 1;
                if indegree[next] == 0 {
                    ready.push_back(next);
                }
            }
        }
    }
    if order.len() != g.num_boxes() {
        let stuck = (0..g.num_boxes()).find(|&b| indegree[b] > 0).unwrap_or(0);
        return Err(DiagramError::Cyclic { box_id: stuck });
    }
    Ok(order)
}

/// Boxes none of whose output wires reach the output boundary or the input of a box.
pub fn eliminable_boxes(c: &Cospan) -> Vec<usize> {
    let g = &c.apex;
    let mut used = vec![false; g.num_wires()];
    for &w in &c.right {
        used[w] = true;
    }
    for b in g.boxes() {
        for &w in &b.inputs {
            used[w] = true;
        }
    }
    (0..g.num_boxes())
        .filter(|&b| g.hyperbox(b).outputs.iter().all(|&w| !used[w]))
        .collect()
}

/// Removes one box together with its output wires. The box must be eliminable.
pub fn eliminate_box(c: &Cospan, b: usize) -> Cospan {
    let g = &c.apex;
    let outs = &g.hyperbox(b).outputs;
    let wires: Vec<usize> = (0..g.num_wires()).filter(|w| !outs.contains(w)).collect();
    let boxes: Vec<usize> = (0..g.num_boxes()).filter(|&x| x != b).collect();
    let (apex, map) = g.restrict(&wires, &boxes);
    let remap = |ws: &[usize]| -> Vec<usize> {
        ws.iter()
            .map(|&w| map[w].expect("eliminated wire on the boundary"))
            .collect()
    };
    Cospan {
        left: remap(&c.left),
        right: remap(&c.right),
        apex,
    }
}

/// Describes boundary types for error messages.
pub(crate) fn describe(sig: &Signature, dom: &[TypeId], cod: &[TypeId]) -> String {
    format!("[{}] -> [{}]", type_list(sig, dom), type_list(sig, cod))
}

#[cfg(test)]
mod tests;
