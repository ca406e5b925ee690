//! Canonical labelling of Markov string diagrams.
//!
//! In a left-monogamous acyclic cospan every wire has a unique source, so once the input
//! boundary is numbered `0..m`, a wire is determined by the box (and port) producing it, and a box
//! by its label and input wires. Boxes are placed one at a time, always taking the ready box with
//! the smallest key `(label, input ids, downstream hash)`; outputs of the placed box get the next
//! wire ids. The only freedom left is the order among boxes with identical keys, which is
//! resolved by trying every order and keeping the lexicographically smallest encoding.
//!
//! Byte format (ASCII, one record per line, numbers in decimal):
//!
//! ```text
//! dom <type ids separated by ','>
//! box <label> <input wire ids separated by ','>      (one line per box, canonical order)
//! cod <wire ids separated by ','>
//! ```
//!
//! Type and box labels are signature indices, so the bytes are stable across runs of the same
//! signature but not across signature edits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::hypergraph::{Cospan, Hypergraph, HyperBox};

/// A canonical labelling: the placement order of boxes and the new id of every old wire.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub box_order: Vec<usize>,
    pub wire_ids: Vec<usize>,
    pub bytes: Vec<u8>,
}

impl Canonical {
    /// Rebuilds the cospan with wires and boxes renumbered canonically.
    pub fn relabel(&self, c: &Cospan) -> Cospan {
        let g = &c.apex;
        let mut wires = vec![0; g.num_wires()];
        for (old, &new) in self.wire_ids.iter().enumerate() {
            wires[new] = g.wire_label(old);
        }
        let boxes = self
            .box_order
            .iter()
            .map(|&b| {
                let bx = g.hyperbox(b);
                HyperBox {
                    label: bx.label,
                    inputs: bx.inputs.iter().map(|&w| self.wire_ids[w]).collect(),
                    outputs: bx.outputs.iter().map(|&w| self.wire_ids[w]).collect(),
                }
            })
            .collect();
        let apex = Hypergraph::new(g.signature().clone(), wires, boxes)
            .expect("relabelling preserves the labelling");
        Cospan {
            apex,
            left: c.left.iter().map(|&w| self.wire_ids[w]).collect(),
            right: c.right.iter().map(|&w| self.wire_ids[w]).collect(),
        }
    }
}

struct Search<'a> {
    c: &'a Cospan,
    downstream: Vec<u64>,
    best: Option<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

#[derive(Clone)]
struct State {
    ids: Vec<Option<usize>>,
    next: usize,
    placed: Vec<bool>,
    order: Vec<usize>,
    encoding: Vec<usize>,
}

const MIX: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(h: u64, v: u64) -> u64 {
    let x = (h ^ v.wrapping_add(MIX)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^ (x >> 29)
}

/// An isomorphism-invariant hash of how each box's outputs are consumed, computed in reverse
/// topological order.
fn downstream_hashes(c: &Cospan, order: &[usize]) -> Vec<u64> {
    let g = &c.apex;
    let mut box_hash = vec![0u64; g.num_boxes()];
    let mut uses: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.num_wires()];
    for (b, bx) in g.boxes().iter().enumerate() {
        for (port, &w) in bx.inputs.iter().enumerate() {
            uses[w].push((b, port));
        }
    }
    let mut right_pos: Vec<Vec<usize>> = vec![Vec::new(); g.num_wires()];
    for (pos, &w) in c.right.iter().enumerate() {
        right_pos[w].push(pos);
    }
    for &b in order.iter().rev() {
        let mut h = mix(0, g.hyperbox(b).label as u64);
        for &w in &g.hyperbox(b).outputs {
            let mut parts: Vec<u64> = right_pos[w].iter().map(|&p| mix(1, p as u64)).collect();
            parts.extend(uses[w].iter().map(|&(user, port)| {
                mix(mix(2, port as u64), box_hash[user])
            }));
            parts.sort_unstable();
            let mut wh = mix(3, parts.len() as u64);
            for p in parts {
                wh = mix(wh, p);
            }
            h = mix(h, wh);
        }
        box_hash[b] = h;
    }
    box_hash
}

impl Search<'_> {
    fn key(&self, st: &State, b: usize) -> (usize, Vec<usize>, u64) {
        let bx = self.c.apex.hyperbox(b);
        (
            bx.label,
            bx.inputs.iter().map(|&w| st.ids[w].unwrap()).collect(),
            self.downstream[b],
        )
    }

    fn place(&self, st: &mut State, b: usize) {
        let bx = self.c.apex.hyperbox(b);
        st.encoding.push(bx.label);
        st.encoding.extend(bx.inputs.iter().map(|&w| st.ids[w].unwrap()));
        for &w in &bx.outputs {
            st.ids[w] = Some(st.next);
            st.next += 1;
        }
        st.placed[b] = true;
        st.order.push(b);
    }

    fn run(&mut self, mut st: State) {
        let g = &self.c.apex;
        loop {
            let ready: Vec<usize> = (0..g.num_boxes())
                .filter(|&b| !st.placed[b] && g.hyperbox(b).inputs.iter().all(|&w| st.ids[w].is_some()))
                .collect();
            if ready.is_empty() {
                break;
            }
            let keys: Vec<_> = ready.iter().map(|&b| self.key(&st, b)).collect();
            let min = keys.iter().min().unwrap().clone();
            let ties: Vec<usize> = ready
                .iter()
                .zip(&keys)
                .filter(|(_, k)| **k == min)
                .map(|(&b, _)| b)
                .collect();
            if ties.len() == 1 {
                self.place(&mut st, ties[0]);
                continue;
            }
            for &b in &ties {
                let mut branch = st.clone();
                self.place(&mut branch, b);
                self.run(branch);
            }
            return;
        }
        let mut enc = st.encoding;
        enc.push(usize::MAX);
        enc.extend(self.c.right.iter().map(|&w| st.ids[w].unwrap()));
        let ids: Vec<usize> = st.ids.iter().map(|i| i.unwrap()).collect();
        let better = match &self.best {
            None => true,
            Some((best_enc, _, _)) => enc < *best_enc,
        };
        if better {
            self.best = Some((enc, st.order, ids));
        }
    }
}

/// Computes the canonical labelling of a valid (acyclic, left-monogamous) cospan.
pub(crate) fn canonicalize(c: &Cospan) -> Canonical {
    let g = &c.apex;
    let order = super::topological_boxes(c).expect("canonical form of a cyclic cospan");
    let mut st = State {
        ids: vec![None; g.num_wires()],
        next: 0,
        placed: vec![false; g.num_boxes()],
        order: Vec::new(),
        encoding: Vec::new(),
    };
    for &w in &c.left {
        st.ids[w] = Some(st.next);
        st.next += 1;
    }
    let mut search = Search {
        c,
        downstream: downstream_hashes(c, &order),
        best: None,
    };
    search.run(st);
    let (_, box_order, wire_ids) = search.best.expect("search always reaches a leaf");

    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = usize>| -> String {
        let mut s = String::new();
        for (i, x) in xs.enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{x}");
        }
        s
    };
    let _ = writeln!(out, "dom {}", join(&mut c.left.iter().map(|&w| g.wire_label(w))));
    for &b in &box_order {
        let bx = g.hyperbox(b);
        let _ = writeln!(
            out,
            "box {} {}",
            bx.label,
            join(&mut bx.inputs.iter().map(|&w| wire_ids[w]))
        );
    }
    let _ = writeln!(out, "cod {}", join(&mut c.right.iter().map(|&w| wire_ids[w])));
    Canonical {
        box_order,
        wire_ids,
        bytes: out.into_bytes(),
    }
}
