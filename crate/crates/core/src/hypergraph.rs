//! Finite hypergraphs labelled over a monoidal signature, and the colimits used to glue them.
//!
//! Wires and boxes are identified by dense indices. A [`Hypergraph`] always carries its
//! [`Signature`], and every constructor checks that the labelling is a homomorphism into it: the
//! declared input/output types of a box label match the types of the wires attached to its ports.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Index of a type in a [`Signature`].
pub type TypeId = usize;
/// Index of a box declaration in a [`Signature`].
pub type BoxLabel = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("duplicate type name `{0}`")]
    DuplicateType(String),
    #[error("duplicate box name `{0}`")]
    DuplicateBox(String),
    #[error("unknown type `{0}`")]
    UnknownTypeName(String),
    #[error("type id {0} is not declared in the signature")]
    UnknownType(TypeId),
    #[error("box label {0} is not declared in the signature")]
    UnknownLabel(BoxLabel),
    #[error("reference to missing wire {wire}")]
    MissingWire { wire: usize },
    #[error("box {box_id} has {found} {side} ports, its label declares {expected}")]
    ArityMismatch {
        box_id: usize,
        side: PortSide,
        expected: usize,
        found: usize,
    },
    #[error("{side} port {port} of box {box_id} expects type {expected}, wire has type {found}")]
    LabelMismatch {
        box_id: usize,
        side: PortSide,
        port: usize,
        expected: TypeId,
        found: TypeId,
    },
    #[error("cannot identify wires {a} (type {a_type}) and {b} (type {b_type})")]
    LabelClash {
        a: usize,
        b: usize,
        a_type: TypeId,
        b_type: TypeId,
    },
    #[error("hypergraphs are labelled over different signatures")]
    SignatureMismatch,
    #[error("span legs have different lengths ({left} and {right})")]
    SpanMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortSide {
    Input,
    Output,
}

impl fmt::Display for PortSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortSide::Input => f.write_str("input"),
            PortSide::Output => f.write_str("output"),
        }
    }
}

/// A declared generator: name plus input and output type lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSig {
    pub name: String,
    pub inputs: Vec<TypeId>,
    pub outputs: Vec<TypeId>,
}

/// A monoidal signature: named types and named boxes between lists of types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    types: Vec<String>,
    boxes: Vec<BoxSig>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, name: &str) -> Result<TypeId, HypergraphError> {
        if self.type_id(name).is_some() {
            return Err(HypergraphError::DuplicateType(name.into()));
        }
        self.types.push(name.into());
        Ok(self.types.len() - 1)
    }

    pub fn add_box(
        &mut self,
        name: &str,
        inputs: &[TypeId],
        outputs: &[TypeId],
    ) -> Result<BoxLabel, HypergraphError> {
        if self.box_id(name).is_some() {
            return Err(HypergraphError::DuplicateBox(name.into()));
        }
        if let Some(&t) = inputs.iter().chain(outputs).find(|&&t| t >= self.types.len()) {
            return Err(HypergraphError::UnknownType(t));
        }
        self.boxes.push(BoxSig {
            name: name.into(),
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
        });
        Ok(self.boxes.len() - 1)
    }

    /// Declares a box using type names.
    pub fn add_box_named(
        &mut self,
        name: &str,
        inputs: &[&str],
        outputs: &[&str],
    ) -> Result<BoxLabel, HypergraphError> {
        let inputs = self.resolve_types(inputs)?;
        let outputs = self.resolve_types(outputs)?;
        self.add_box(name, &inputs, &outputs)
    }

    pub fn resolve_types(&self, names: &[&str]) -> Result<Vec<TypeId>, HypergraphError> {
        names
            .iter()
            .map(|n| self.type_id(n).ok_or_else(|| HypergraphError::UnknownTypeName((*n).into())))
            .collect()
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t == name)
    }

    pub fn box_id(&self, name: &str) -> Option<BoxLabel> {
        self.boxes.iter().position(|b| b.name == name)
    }

    pub fn type_name(&self, id: TypeId) -> &str {
        &self.types[id]
    }

    pub fn box_sig(&self, id: BoxLabel) -> &BoxSig {
        &self.boxes[id]
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn boxes(&self) -> &[BoxSig] {
        &self.boxes
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn num_boxes(&self) -> usize {
        self.boxes.len()
    }
}

/// Two signature handles are compatible when they are the same allocation or structurally equal.
pub fn same_signature(a: &Arc<Signature>, b: &Arc<Signature>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A box occurrence in a hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperBox {
    pub label: BoxLabel,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A finite hypergraph whose wires and boxes are labelled over a signature.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    sig: Arc<Signature>,
    wires: Vec<TypeId>,
    boxes: Vec<HyperBox>,
}

impl Hypergraph {
    pub fn new(
        sig: Arc<Signature>,
        wires: Vec<TypeId>,
        boxes: Vec<HyperBox>,
    ) -> Result<Self, HypergraphError> {
        if let Some(&t) = wires.iter().find(|&&t| t >= sig.num_types()) {
            return Err(HypergraphError::UnknownType(t));
        }
        let g = Hypergraph { sig, wires, boxes };
        for (id, b) in g.boxes.iter().enumerate() {
            g.check_box(id, b)?;
        }
        Ok(g)
    }

    pub fn empty(sig: Arc<Signature>) -> Self {
        Hypergraph {
            sig,
            wires: Vec::new(),
            boxes: Vec::new(),
        }
    }

    /// The discrete hypergraph with one wire per listed type.
    pub fn discrete(sig: Arc<Signature>, types: &[TypeId]) -> Result<Self, HypergraphError> {
        Self::new(sig, types.to_vec(), Vec::new())
    }

    fn check_box(&self, id: usize, b: &HyperBox) -> Result<(), HypergraphError> {
        if b.label >= self.sig.num_boxes() {
            return Err(HypergraphError::UnknownLabel(b.label));
        }
        let decl = self.sig.box_sig(b.label);
        for (side, ports, declared) in [
            (PortSide::Input, &b.inputs, &decl.inputs),
            (PortSide::Output, &b.outputs, &decl.outputs),
        ] {
            if ports.len() != declared.len() {
                return Err(HypergraphError::ArityMismatch {
                    box_id: id,
                    side,
                    expected: declared.len(),
                    found: ports.len(),
                });
            }
            for (port, (&w, &expected)) in ports.iter().zip(declared).enumerate() {
                let found = *self
                    .wires
                    .get(w)
                    .ok_or(HypergraphError::MissingWire { wire: w })?;
                if found != expected {
                    return Err(HypergraphError::LabelMismatch {
                        box_id: id,
                        side,
                        port,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn add_wire(&mut self, ty: TypeId) -> Result<usize, HypergraphError> {
        if ty >= self.sig.num_types() {
            return Err(HypergraphError::UnknownType(ty));
        }
        self.wires.push(ty);
        Ok(self.wires.len() - 1)
    }

    pub fn add_box(
        &mut self,
        label: BoxLabel,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<usize, HypergraphError> {
        let b = HyperBox {
            label,
            inputs,
            outputs,
        };
        self.check_box(self.boxes.len(), &b)?;
        self.boxes.push(b);
        Ok(self.boxes.len() - 1)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn num_wires(&self) -> usize {
        self.wires.len()
    }

    pub fn num_boxes(&self) -> usize {
        self.boxes.len()
    }

    pub fn wire_label(&self, w: usize) -> TypeId {
        self.wires[w]
    }

    pub fn wire_labels(&self) -> &[TypeId] {
        &self.wires
    }

    pub fn boxes(&self) -> &[HyperBox] {
        &self.boxes
    }

    pub fn hyperbox(&self, b: usize) -> &HyperBox {
        &self.boxes[b]
    }

    /// Re-checks the labelling invariant. Constructors already enforce it.
    pub fn check_labelling(&self) -> Result<(), HypergraphError> {
        if let Some(&t) = self.wires.iter().find(|&&t| t >= self.sig.num_types()) {
            return Err(HypergraphError::UnknownType(t));
        }
        for (id, b) in self.boxes.iter().enumerate() {
            self.check_box(id, b)?;
        }
        Ok(())
    }

    /// Disjoint union together with the two coproduct injections.
    pub fn coproduct(
        a: &Hypergraph,
        b: &Hypergraph,
    ) -> Result<(Hypergraph, HyperMorphism, HyperMorphism), HypergraphError> {
        if !same_signature(&a.sig, &b.sig) {
            return Err(HypergraphError::SignatureMismatch);
        }
        let (nw, nb) = (a.num_wires(), a.num_boxes());
        let mut wires = a.wires.clone();
        wires.extend_from_slice(&b.wires);
        let mut boxes = a.boxes.clone();
        boxes.extend(b.boxes.iter().map(|bx| HyperBox {
            label: bx.label,
            inputs: bx.inputs.iter().map(|w| w + nw).collect(),
            outputs: bx.outputs.iter().map(|w| w + nw).collect(),
        }));
        let inl = HyperMorphism {
            wires: (0..nw).collect(),
            boxes: (0..nb).collect(),
        };
        let inr = HyperMorphism {
            wires: (nw..nw + b.num_wires()).collect(),
            boxes: (nb..nb + b.num_boxes()).collect(),
        };
        let sum = Hypergraph {
            sig: a.sig.clone(),
            wires,
            boxes,
        };
        Ok((sum, inl, inr))
    }

    /// Pushout of `a <- C -> b` where `C` is discrete: `left[i]` and `right[i]` are the images of the
    /// `i`-th wire of `C`. Returns the glued hypergraph and the two cocone maps.
    pub fn pushout(
        a: &Hypergraph,
        left: &[usize],
        b: &Hypergraph,
        right: &[usize],
    ) -> Result<(Hypergraph, HyperMorphism, HyperMorphism), HypergraphError> {
        if left.len() != right.len() {
            return Err(HypergraphError::SpanMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        let (sum, inl, inr) = Self::coproduct(a, b)?;
        let mut pairs = Vec::with_capacity(left.len());
        for (&l, &r) in left.iter().zip(right) {
            if l >= a.num_wires() {
                return Err(HypergraphError::MissingWire { wire: l });
            }
            if r >= b.num_wires() {
                return Err(HypergraphError::MissingWire { wire: r });
            }
            pairs.push((inl.wires[l], inr.wires[r]));
        }
        let (glued, class) = sum.quotient_wires(&pairs)?;
        let through = |m: HyperMorphism| HyperMorphism {
            wires: m.wires.iter().map(|&w| class[w]).collect(),
            boxes: m.boxes,
        };
        Ok((glued, through(inl), through(inr)))
    }

    /// Quotients the wire set by the equivalence generated by `pairs`. Classes are numbered by
    /// their smallest member. Returns the quotient and the map from old wire to class.
    pub fn quotient_wires(
        &self,
        pairs: &[(usize, usize)],
    ) -> Result<(Hypergraph, Vec<usize>), HypergraphError> {
        let mut uf = UnionFind::new(self.num_wires());
        for &(a, b) in pairs {
            for w in [a, b] {
                if w >= self.num_wires() {
                    return Err(HypergraphError::MissingWire { wire: w });
                }
            }
            if self.wires[a] != self.wires[b] {
                return Err(HypergraphError::LabelClash {
                    a,
                    b,
                    a_type: self.wires[a],
                    b_type: self.wires[b],
                });
            }
            uf.union(a, b);
        }
        let class = uf.classes();
        let count = class.iter().copied().max().map_or(0, |m| m + 1);
        let mut wires = vec![0; count];
        for (w, &c) in class.iter().enumerate() {
            wires[c] = self.wires[w];
        }
        let boxes = self
            .boxes
            .iter()
            .map(|b| HyperBox {
                label: b.label,
                inputs: b.inputs.iter().map(|&w| class[w]).collect(),
                outputs: b.outputs.iter().map(|&w| class[w]).collect(),
            })
            .collect();
        let g = Hypergraph {
            sig: self.sig.clone(),
            wires,
            boxes,
        };
        Ok((g, class))
    }

    /// Keeps only the listed wires and boxes, renumbering them in the given order. Boxes must only
    /// reference kept wires.
    pub(crate) fn restrict(&self, wires: &[usize], boxes: &[usize]) -> (Hypergraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.num_wires()];
        for (new, &old) in wires.iter().enumerate() {
            map[old] = Some(new);
        }
        let remap = |ws: &[usize]| -> Vec<usize> {
            ws.iter()
                .map(|&w| map[w].expect("restricted box references a dropped wire"))
                .collect()
        };
        let g = Hypergraph {
            sig: self.sig.clone(),
            wires: wires.iter().map(|&w| self.wires[w]).collect(),
            boxes: boxes
                .iter()
                .map(|&b| {
                    let bx = &self.boxes[b];
                    HyperBox {
                        label: bx.label,
                        inputs: remap(&bx.inputs),
                        outputs: remap(&bx.outputs),
                    }
                })
                .collect(),
        };
        (g, map)
    }
}

/// A hypergraph homomorphism given by its wire and box components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperMorphism {
    pub wires: Vec<usize>,
    pub boxes: Vec<usize>,
}

impl HyperMorphism {
    /// Checks that the map preserves labels and port incidence.
    pub fn is_homomorphism(&self, src: &Hypergraph, dst: &Hypergraph) -> bool {
        if self.wires.len() != src.num_wires() || self.boxes.len() != src.num_boxes() {
            return false;
        }
        let wires_ok = self.wires.iter().enumerate().all(|(w, &img)| {
            img < dst.num_wires() && dst.wire_label(img) == src.wire_label(w)
        });
        wires_ok
            && self.boxes.iter().enumerate().all(|(b, &img)| {
                let (s, Some(d)) = (src.hyperbox(b), dst.boxes().get(img)) else {
                    return false;
                };
                s.label == d.label
                    && s.inputs.iter().map(|&w| self.wires[w]).eq(d.inputs.iter().copied())
                    && s.outputs.iter().map(|&w| self.wires[w]).eq(d.outputs.iter().copied())
            })
    }
}

/// A cospan `m -> G <- n` whose feet are discrete, stored as the images of the boundary wires.
#[derive(Debug, Clone)]
pub struct Cospan {
    pub apex: Hypergraph,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Cospan {
    pub fn new(apex: Hypergraph, left: Vec<usize>, right: Vec<usize>) -> Result<Self, HypergraphError> {
        if let Some(&w) = left.iter().chain(&right).find(|&&w| w >= apex.num_wires()) {
            return Err(HypergraphError::MissingWire { wire: w });
        }
        Ok(Cospan { apex, left, right })
    }

    pub fn dom_types(&self) -> Vec<TypeId> {
        self.left.iter().map(|&w| self.apex.wire_label(w)).collect()
    }

    pub fn cod_types(&self) -> Vec<TypeId> {
        self.right.iter().map(|&w| self.apex.wire_label(w)).collect()
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.apex.signature()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Dense class numbering, ordered by the smallest element of each class.
    pub fn classes(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut root_class = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let r = self.find(x);
            if root_class[r] == usize::MAX {
                root_class[r] = next;
                next += 1;
            }
            out.push(root_class[r]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig() -> Arc<Signature> {
        let mut s = Signature::new();
        s.add_type("X").unwrap();
        s.add_type("Y").unwrap();
        s.add_box_named("f", &["X"], &["Y"]).unwrap();
        s.add_box_named("m", &["X", "Y"], &["X"]).unwrap();
        Arc::new(s)
    }

    fn arb_graph(sig: Arc<Signature>) -> impl Strategy<Value = Hypergraph> {
        (1usize..6, proptest::collection::vec((0usize..2, any::<u32>(), any::<u32>()), 0..4)).prop_map(
            move |(nw, boxes)| {
                let mut g = Hypergraph::empty(sig.clone());
                for i in 0..nw {
                    g.add_wire(i % 2).unwrap();
                }
                for (label, s1, s2) in boxes {
                    let xs: Vec<usize> = (0..g.num_wires()).filter(|&w| g.wire_label(w) == 0).collect();
                    let ys: Vec<usize> = (0..g.num_wires()).filter(|&w| g.wire_label(w) == 1).collect();
                    if label == 0 && !xs.is_empty() && !ys.is_empty() {
                        let i = xs[s1 as usize % xs.len()];
                        let o = ys[s2 as usize % ys.len()];
                        g.add_box(0, vec![i], vec![o]).unwrap();
                    } else if !xs.is_empty() && !ys.is_empty() {
                        let i = xs[s1 as usize % xs.len()];
                        let j = ys[s2 as usize % ys.len()];
                        let o = xs[(s1 as usize / 7) % xs.len()];
                        g.add_box(1, vec![i, j], vec![o]).unwrap();
                    }
                }
                g
            },
        )
    }

    /// Equivalence closure by repeated relaxation, independent of union-find.
    fn closure_classes(n: usize, pairs: &[(usize, usize)]) -> usize {
        let mut rel = vec![vec![false; n]; n];
        for (i, row) in rel.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            rel[a][b] = true;
            rel[b][a] = true;
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if rel[i][j] {
                        continue;
                    }
                    if (0..n).any(|k| rel[i][k] && rel[k][j]) {
                        rel[i][j] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).filter(|&i| (0..i).all(|j| !rel[i][j])).count()
    }

    #[test]
    fn signature_rejects_duplicates_and_unknown_types() {
        let mut s = Signature::new();
        s.add_type("X").unwrap();
        assert_eq!(s.add_type("X"), Err(HypergraphError::DuplicateType("X".into())));
        assert!(matches!(
            s.add_box_named("f", &["Z"], &[]),
            Err(HypergraphError::UnknownTypeName(_))
        ));
        s.add_box_named("f", &["X"], &[]).unwrap();
        assert!(matches!(s.add_box_named("f", &[], &[]), Err(HypergraphError::DuplicateBox(_))));
    }

    #[test]
    fn labelling_is_checked() {
        let s = sig();
        let mut g = Hypergraph::empty(s);
        let x = g.add_wire(0).unwrap();
        let y = g.add_wire(1).unwrap();
        assert!(matches!(
            g.add_box(0, vec![y], vec![x]),
            Err(HypergraphError::LabelMismatch { .. })
        ));
        assert!(matches!(
            g.add_box(0, vec![x], vec![]),
            Err(HypergraphError::ArityMismatch { .. })
        ));
        assert!(matches!(
            g.add_box(0, vec![x], vec![9]),
            Err(HypergraphError::MissingWire { wire: 9 })
        ));
        g.add_box(0, vec![x], vec![y]).unwrap();
        g.check_labelling().unwrap();
    }

    #[test]
    fn coproduct_with_empty_is_unit() {
        let s = sig();
        let mut g = Hypergraph::empty(s.clone());
        let x = g.add_wire(0).unwrap();
        let y = g.add_wire(1).unwrap();
        g.add_box(0, vec![x], vec![y]).unwrap();
        let (sum, inl, inr) = Hypergraph::coproduct(&g, &Hypergraph::empty(s)).unwrap();
        assert_eq!(sum.wire_labels(), g.wire_labels());
        assert_eq!(sum.boxes(), g.boxes());
        assert!(inl.is_homomorphism(&g, &sum));
        assert!(inr.wires.is_empty());
    }

    #[test]
    fn coproduct_of_single_wires() {
        let s = sig();
        let a = Hypergraph::discrete(s.clone(), &[0]).unwrap();
        let b = Hypergraph::discrete(s, &[1]).unwrap();
        let (sum, _, inr) = Hypergraph::coproduct(&a, &b).unwrap();
        assert_eq!(sum.wire_labels(), &[0, 1]);
        assert_eq!(inr.wires, vec![1]);
    }

    #[test]
    fn coproduct_rejects_foreign_signature() {
        let a = Hypergraph::empty(sig());
        let b = Hypergraph::empty(Arc::new(Signature::new()));
        assert_eq!(
            Hypergraph::coproduct(&a, &b).err(),
            Some(HypergraphError::SignatureMismatch)
        );
    }

    #[test]
    fn pushout_along_empty_is_coproduct() {
        let s = sig();
        let a = Hypergraph::discrete(s.clone(), &[0, 1]).unwrap();
        let b = Hypergraph::discrete(s, &[1]).unwrap();
        let (p, _, _) = Hypergraph::pushout(&a, &[], &b, &[]).unwrap();
        assert_eq!(p.wire_labels(), &[0, 1, 1]);
    }

    #[test]
    fn gluing_two_identity_wires_gives_one_wire() {
        let s = sig();
        let a = Hypergraph::discrete(s.clone(), &[0]).unwrap();
        let b = Hypergraph::discrete(s, &[0]).unwrap();
        let (p, l, r) = Hypergraph::pushout(&a, &[0], &b, &[0]).unwrap();
        assert_eq!(p.num_wires(), 1);
        assert_eq!(l.wires, r.wires);
    }

    #[test]
    fn pushout_label_clash() {
        let s = sig();
        let a = Hypergraph::discrete(s.clone(), &[0]).unwrap();
        let b = Hypergraph::discrete(s, &[1]).unwrap();
        assert!(matches!(
            Hypergraph::pushout(&a, &[0], &b, &[0]),
            Err(HypergraphError::LabelClash { .. })
        ));
    }

    #[test]
    fn quotient_trivial_cases() {
        let s = sig();
        let mut g = Hypergraph::empty(s);
        let x = g.add_wire(0).unwrap();
        let y = g.add_wire(1).unwrap();
        g.add_box(0, vec![x], vec![y]).unwrap();
        let (q, class) = g.quotient_wires(&[]).unwrap();
        assert_eq!(class, vec![0, 1]);
        assert_eq!(q.boxes(), g.boxes());
        let (q, _) = g.quotient_wires(&[(x, x)]).unwrap();
        assert_eq!(q.wire_labels(), g.wire_labels());
    }

    proptest! {
        #[test]
        fn coproduct_counts_add(a in arb_graph(sig()), b in arb_graph(sig())) {
            let (sum, inl, inr) = Hypergraph::coproduct(&a, &b).unwrap();
            prop_assert_eq!(sum.num_wires(), a.num_wires() + b.num_wires());
            prop_assert_eq!(sum.num_boxes(), a.num_boxes() + b.num_boxes());
            prop_assert!(inl.is_homomorphism(&a, &sum));
            prop_assert!(inr.is_homomorphism(&b, &sum));
            sum.check_labelling().unwrap();
        }

        #[test]
        fn coproduct_is_associative(a in arb_graph(sig()), b in arb_graph(sig()), c in arb_graph(sig())) {
            let (ab, _, _) = Hypergraph::coproduct(&a, &b).unwrap();
            let (l, _, _) = Hypergraph::coproduct(&ab, &c).unwrap();
            let (bc, _, _) = Hypergraph::coproduct(&b, &c).unwrap();
            let (r, _, _) = Hypergraph::coproduct(&a, &bc).unwrap();
            // with the offset numbering both sides are literally equal
            prop_assert_eq!(l.wire_labels(), r.wire_labels());
            prop_assert_eq!(l.boxes(), r.boxes());
        }

        #[test]
        fn quotient_matches_closure_oracle(
            g in arb_graph(sig()),
            raw in proptest::collection::vec((any::<u16>(), any::<u16>()), 0..6),
        ) {
            let n = g.num_wires();
            // only pair same-typed wires
            let pairs: Vec<(usize, usize)> = raw
                .iter()
                .map(|&(a, b)| (a as usize % n, b as usize % n))
                .filter(|&(a, b)| g.wire_label(a) == g.wire_label(b))
                .collect();
            let (q, class) = g.quotient_wires(&pairs).unwrap();
            prop_assert_eq!(q.num_wires(), closure_classes(n, &pairs));
            let hom = HyperMorphism { wires: class, boxes: (0..g.num_boxes()).collect() };
            prop_assert!(hom.is_homomorphism(&g, &q));
            q.check_labelling().unwrap();
        }

        #[test]
        fn pushout_class_count_and_commutativity(
            a in arb_graph(sig()),
            b in arb_graph(sig()),
            raw in proptest::collection::vec((any::<u16>(), any::<u16>()), 0..4),
        ) {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (x, y) in raw {
                let l = x as usize % a.num_wires();
                let r = y as usize % b.num_wires();
                if a.wire_label(l) == b.wire_label(r) {
                    left.push(l);
                    right.push(r);
                }
            }
            let (p, fa, fb) = Hypergraph::pushout(&a, &left, &b, &right).unwrap();
            let n = a.num_wires() + b.num_wires();
            let pairs: Vec<(usize, usize)> =
                left.iter().zip(&right).map(|(&l, &r)| (l, a.num_wires() + r)).collect();
            prop_assert_eq!(p.num_wires(), closure_classes(n, &pairs));
            prop_assert!(fa.is_homomorphism(&a, &p));
            prop_assert!(fb.is_homomorphism(&b, &p));
            for (&l, &r) in left.iter().zip(&right) {
                prop_assert_eq!(fa.wires[l], fb.wires[r]);
            }
            let (q, _, _) = Hypergraph::pushout(&b, &right, &a, &left).unwrap();
            prop_assert_eq!(q.num_wires(), p.num_wires());
            prop_assert_eq!(q.num_boxes(), p.num_boxes());
        }
    }
}
