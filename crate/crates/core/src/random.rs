//! Seeded generators for kernels, diagrams, models and combs used by the law suite and tests.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::combs::Comb;
use crate::diagram::Diagram;
use crate::hypergraph::{BoxLabel, Cospan, Hypergraph, Signature, TypeId};
use crate::interp::Model;
use crate::stoch::{size, FinSet, Kernel};

/// Deterministic per-case seed derived from a master seed (splitmix64 finaliser).
pub fn case_seed(master: u64, stream: u64, case: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ case.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A list of `len` factors named `{prefix}{i}` with cardinalities in `1..=max_card`.
pub fn finsets<R: Rng + ?Sized>(rng: &mut R, len: usize, max_card: usize, prefix: &str) -> Vec<FinSet> {
    (0..len)
        .map(|i| FinSet::new(&format!("{prefix}{i}"), rng.gen_range(1..=max_card)).unwrap())
        .collect()
}

/// A factor list of length `0..=max_len`.
pub fn object<R: Rng + ?Sized>(rng: &mut R, max_len: usize, max_card: usize, prefix: &str) -> Vec<FinSet> {
    let len = rng.gen_range(0..=max_len);
    finsets(rng, len, max_card, prefix)
}

/// A random probability vector of length `n`. Each entry is zeroed with probability `zero_prob`,
/// keeping at least one positive entry.
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(zero_prob) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.gen_range(0..n)] = 1.0;
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// A random kernel; see [`distribution`] for `zero_prob`.
pub fn kernel<R: Rng + ?Sized>(rng: &mut R, dom: &[FinSet], cod: &[FinSet], zero_prob: f64) -> Kernel {
    let (rows, cols) = (size(dom), size(cod));
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        data.extend(distribution(rng, cols, zero_prob));
    }
    Kernel::new(dom.to_vec(), cod.to_vec(), data).unwrap()
}

/// A random deterministic kernel.
pub fn deterministic<R: Rng + ?Sized>(rng: &mut R, dom: &[FinSet], cod: &[FinSet]) -> Kernel {
    let cols = size(cod);
    let targets: Vec<usize> = (0..size(dom)).map(|_| rng.gen_range(0..cols)).collect();
    Kernel::from_fn(dom.to_vec(), cod.to_vec(), |r, c| if targets[r] == c { 1.0 } else { 0.0 }).unwrap()
}

/// A non-signalling kernel `X ⊗ W' -> Y ⊗ W` together with the pieces it was built from.
#[derive(Debug, Clone)]
pub struct NonsignallingSample {
    pub f: Kernel,
    /// `X -> W`
    pub f_s: Kernel,
    /// `W ⊗ X ⊗ W' -> Y`
    pub f_p: Kernel,
}

/// Builds `f(y, w | x, w') = f_s(w | x) · f_p(y | w, x, w')` from random pieces.
pub fn nonsignalling<R: Rng + ?Sized>(
    rng: &mut R,
    xs: &[FinSet],
    wps: &[FinSet],
    ys: &[FinSet],
    ws: &[FinSet],
    zero_prob: f64,
) -> NonsignallingSample {
    let f_s = kernel(rng, xs, ws, zero_prob);
    let mut pdom = ws.to_vec();
    pdom.extend_from_slice(xs);
    pdom.extend_from_slice(wps);
    let f_p = kernel(rng, &pdom, ys, zero_prob);
    let f = assemble_nonsignalling(&f_s, &f_p, wps);
    NonsignallingSample { f, f_s, f_p }
}

/// The index formula `f(y, w | x, w') = f_s(w | x) · f_p(y | w, x, w')`.
pub fn assemble_nonsignalling(f_s: &Kernel, f_p: &Kernel, wps: &[FinSet]) -> Kernel {
    let (xs, ws, ys) = (f_s.dom(), f_s.cod(), f_p.cod());
    let (nx, nwp, nw) = (size(xs), size(wps), size(ws));
    let mut dom = xs.to_vec();
    dom.extend_from_slice(wps);
    let mut cod = ys.to_vec();
    cod.extend_from_slice(ws);
    Kernel::from_fn(dom, cod, |row, col| {
        let (x, wp) = (row / nwp, row % nwp);
        let (y, w) = (col / nw, col % nw);
        f_s.get(x, w) * f_p.get((w * nx + x) * nwp + wp, y)
    })
    .unwrap()
}

/// Random diagrams over a fixed signature, built directly as cospans.
#[derive(Debug, Clone)]
pub struct DiagramGen {
    pub sig: Arc<Signature>,
    pub max_boxes: usize,
    pub max_wires: usize,
    /// Longest boundary produced by [`DiagramGen::diagram`].
    pub max_boundary: usize,
}

impl DiagramGen {
    /// Types `X, Y`; boxes `p : -> X`, `q : -> Y`, `f : X -> X`, `g : X -> Y`, `h : Y -> X, Y`,
    /// `m : X, Y -> X`, `k : X, X -> Y`. At most 5 boxes and 8 wires.
    pub fn standard() -> DiagramGen {
        DiagramGen::new(Arc::new(standard_signature()), 5, 8, 3)
    }

    pub fn new(sig: Arc<Signature>, max_boxes: usize, max_wires: usize, max_boundary: usize) -> DiagramGen {
        DiagramGen {
            sig,
            max_boxes,
            max_wires,
            max_boundary,
        }
    }

    pub fn types<R: Rng + ?Sized>(&self, rng: &mut R, min_len: usize, max_len: usize) -> Vec<TypeId> {
        let n = self.sig.num_types();
        let len = rng.gen_range(min_len..=max_len);
        (0..len).map(|_| rng.gen_range(0..n)).collect()
    }

    /// A diagram with random boundaries.
    pub fn diagram<R: Rng + ?Sized>(&self, rng: &mut R) -> Diagram {
        let dom = self.types(rng, 0, self.max_boundary);
        let cod = self.types(rng, 0, self.max_boundary);
        self.diagram_between(rng, &dom, &cod)
    }

    /// A diagram `dom -> cod`.
    pub fn diagram_between<R: Rng + ?Sized>(&self, rng: &mut R, dom: &[TypeId], cod: &[TypeId]) -> Diagram {
        self.constrained(rng, dom, cod, 0, 0)
    }

    /// A diagram `dom ++ w -> cod ++ w` with no path from the `w` inputs to the `w` outputs.
    pub fn nonsignalling<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        dom: &[TypeId],
        cod: &[TypeId],
        w: &[TypeId],
    ) -> Diagram {
        let mut d = dom.to_vec();
        d.extend_from_slice(w);
        let mut c = cod.to_vec();
        c.extend_from_slice(w);
        self.constrained(rng, &d, &c, w.len(), w.len())
    }

    /// A diagram `dom -> cod` with no path from the last `tainted_inputs` inputs to the last
    /// `clean_outputs` outputs.
    pub fn nonsignalling_between<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        dom: &[TypeId],
        cod: &[TypeId],
        tainted_inputs: usize,
        clean_outputs: usize,
    ) -> Diagram {
        self.constrained(rng, dom, cod, tainted_inputs, clean_outputs)
    }

    fn constrained<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        dom: &[TypeId],
        cod: &[TypeId],
        tainted_inputs: usize,
        clean_outputs: usize,
    ) -> Diagram {
        let mut last = None;
        for _ in 0..64 {
            let n = rng.gen_range(0..=self.max_boxes);
            let c = self.raw_cospan(rng, dom, cod, tainted_inputs, clean_outputs, n);
            let d = Diagram::normalize(c).expect("generated cospans are acyclic and left-monogamous");
            if d.num_boxes() <= self.max_boxes && d.num_wires() <= self.max_wires {
                return d;
            }
            last = Some(d);
        }
        last.unwrap()
    }

    /// An acyclic left-monogamous cospan that may contain eliminable boxes. The last
    /// `clean_outputs` boundary outputs are never reachable from the last `tainted_inputs`
    /// boundary inputs.
    pub fn raw_cospan<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        dom: &[TypeId],
        cod: &[TypeId],
        tainted_inputs: usize,
        clean_outputs: usize,
        boxes: usize,
    ) -> Cospan {
        let sig = &self.sig;
        let mut g = Hypergraph::empty(sig.clone());
        let left: Vec<usize> = dom.iter().map(|&t| g.add_wire(t).unwrap()).collect();
        let mut tainted = vec![false; left.len()];
        let first = left.len() - tainted_inputs;
        tainted[first..].fill(true);
        let budget = self.max_wires.saturating_sub(cod.len());
        for _ in 0..boxes {
            for _attempt in 0..8 {
                let label = rng.gen_range(0..sig.num_boxes());
                let bs = sig.box_sig(label);
                if g.num_wires() + bs.outputs.len() > budget {
                    continue;
                }
                let mut inputs = Vec::with_capacity(bs.inputs.len());
                for &t in &bs.inputs {
                    let cands: Vec<usize> = (0..g.num_wires()).filter(|&w| g.wire_label(w) == t).collect();
                    if cands.is_empty() {
                        break;
                    }
                    inputs.push(cands[rng.gen_range(0..cands.len())]);
                }
                if inputs.len() != bs.inputs.len() {
                    continue;
                }
                let taint = inputs.iter().any(|&w| tainted[w]);
                let outputs = self.add_box(&mut g, label, inputs);
                tainted.extend(outputs.iter().map(|_| taint));
                break;
            }
        }
        let mut right = Vec::with_capacity(cod.len());
        for (i, &t) in cod.iter().enumerate() {
            let clean = i >= cod.len() - clean_outputs;
            let cands: Vec<usize> = (0..g.num_wires())
                .filter(|&w| g.wire_label(w) == t && !(clean && tainted[w]))
                .collect();
            let w = if cands.is_empty() || rng.gen_bool(0.15) {
                let state = self.state_for(t);
                let outs = self.add_box(&mut g, state, Vec::new());
                tainted.extend(outs.iter().map(|_| false));
                let pos = sig.box_sig(state).outputs.iter().position(|&o| o == t).unwrap();
                outs[pos]
            } else {
                cands[rng.gen_range(0..cands.len())]
            };
            right.push(w);
        }
        Cospan::new(g, left, right).unwrap()
    }

    fn add_box(&self, g: &mut Hypergraph, label: BoxLabel, inputs: Vec<usize>) -> Vec<usize> {
        let outs: Vec<usize> = self
            .sig
            .box_sig(label)
            .outputs
            .iter()
            .map(|&t| g.add_wire(t).unwrap())
            .collect();
        g.add_box(label, inputs, outs.clone()).unwrap();
        outs
    }

    fn state_for(&self, t: TypeId) -> BoxLabel {
        (0..self.sig.num_boxes())
            .find(|&b| {
                let bs = self.sig.box_sig(b);
                bs.inputs.is_empty() && bs.outputs.contains(&t)
            })
            .expect("signature has a state for every type")
    }
}

pub fn standard_signature() -> Signature {
    let mut s = Signature::new();
    s.add_type("X").unwrap();
    s.add_type("Y").unwrap();
    s.add_box_named("p", &[], &["X"]).unwrap();
    s.add_box_named("q", &[], &["Y"]).unwrap();
    s.add_box_named("f", &["X"], &["X"]).unwrap();
    s.add_box_named("g", &["X"], &["Y"]).unwrap();
    s.add_box_named("h", &["Y"], &["X", "Y"]).unwrap();
    s.add_box_named("m", &["X", "Y"], &["X"]).unwrap();
    s.add_box_named("k", &["X", "X"], &["Y"]).unwrap();
    s
}

/// A model with type cardinalities in `1..=max_card` and random kernels.
pub fn model<R: Rng + ?Sized>(rng: &mut R, sig: &Arc<Signature>, max_card: usize, zero_prob: f64) -> Model {
    let cards: Vec<usize> = (0..sig.num_types()).map(|_| rng.gen_range(1..=max_card)).collect();
    let sets: Vec<FinSet> = sig
        .types()
        .iter()
        .zip(&cards)
        .map(|(n, &c)| FinSet::new(n, c).unwrap())
        .collect();
    let kernels = sig
        .boxes()
        .iter()
        .map(|b| {
            let dom: Vec<FinSet> = b.inputs.iter().map(|&t| sets[t].clone()).collect();
            let cod: Vec<FinSet> = b.outputs.iter().map(|&t| sets[t].clone()).collect();
            kernel(rng, &dom, &cod, zero_prob)
        })
        .collect();
    Model::new(sig.clone(), cards, kernels).unwrap()
}

/// Boundary objects of a comb: `A -> A'` outside, `B -> B'` at the hole.
#[derive(Debug, Clone)]
pub struct CombShape {
    pub a: Vec<FinSet>,
    pub a_out: Vec<FinSet>,
    pub b: Vec<FinSet>,
    pub b_out: Vec<FinSet>,
}

impl CombShape {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_card: usize) -> CombShape {
        CombShape {
            a: object(rng, 1, max_card, "A"),
            a_out: object(rng, 1, max_card, "C"),
            b: object(rng, 1, max_card, "B"),
            b_out: object(rng, 1, max_card, "D"),
        }
    }
}

/// A comb of the given shape with a random environment.
pub fn comb<R: Rng + ?Sized>(rng: &mut R, shape: &CombShape, max_card: usize, zero_prob: f64) -> Comb {
    let env = object(rng, 2, max_card, "E");
    let mut fcod = env.clone();
    fcod.extend_from_slice(&shape.b);
    let f = kernel(rng, &shape.a, &fcod, zero_prob);
    let mut gdom = env.clone();
    gdom.extend_from_slice(&shape.b_out);
    let g = kernel(rng, &gdom, &shape.a_out, zero_prob);
    Comb::new(env, f, g, shape.b.len()).unwrap()
}

/// Two combs related by one sliding step: `(E', f ; (s ⊗ id_B), g)` and `(E, f, (s ⊗ id_B') ; g)`
/// for a random `s : E' -> E`.
pub fn sliding_pair<R: Rng + ?Sized>(rng: &mut R, shape: &CombShape, max_card: usize, zero_prob: f64) -> (Comb, Comb) {
    let e_src = object(rng, 2, max_card, "E");
    let e_dst = object(rng, 2, max_card, "F");
    let s = kernel(rng, &e_src, &e_dst, zero_prob);
    let mut fcod = e_src.clone();
    fcod.extend_from_slice(&shape.b);
    let f = kernel(rng, &shape.a, &fcod, zero_prob);
    let mut gdom = e_dst.clone();
    gdom.extend_from_slice(&shape.b_out);
    let g = kernel(rng, &gdom, &shape.a_out, zero_prob);

    let slid_f = f.then(&s.tensor(&Kernel::identity(&shape.b))).unwrap();
    let left = Comb::new(e_dst.clone(), slid_f, g.clone(), shape.b.len()).unwrap();
    let slid_g = s.tensor(&Kernel::identity(&shape.b_out)).then(&g).unwrap();
    let right = Comb::new(e_src, f, slid_g, shape.b.len()).unwrap();
    (left, right)
}
