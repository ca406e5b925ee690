//! Randomised checks of the algebraic laws: trace axioms for kernels and for contraction,
//! Markov category laws of the free category, soundness of the interpretation, and the comb
//! laws. Every check draws its own instance from an rng and returns a residual.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combs::{random_context, Comb};
use crate::contraction::{contract, TracePartition};
use crate::diagram::{eliminable_boxes, eliminate_box, Diagram};
use crate::hypergraph::{Cospan, Hypergraph, Signature, TypeId};
use crate::interp::{check_contraction_identity, check_trace_soundness, interpret, IdentityVerdict, Model, SoundnessVerdict};
use crate::random::{self, case_seed, CombShape, DiagramGen};
use crate::stoch::{
    bayes_inverse, bayes_residual, causal_trace, conditional, conditional_residual, disintegrate, is_atomic,
    mat_trace, size, FinSet, Kernel, Tolerances,
};

const TOL: Tolerances = Tolerances::DEFAULT;
const MAX_CARD: usize = 4;

pub type LawResult = Result<f64, String>;

/// A named randomised law. A case passes when its residual is at most `tolerance`.
#[derive(Clone, Copy)]
pub struct Law {
    pub name: &'static str,
    pub tolerance: f64,
    pub check: fn(&mut ChaCha8Rng) -> LawResult,
}

impl core::fmt::Debug for Law {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Law").field("name", &self.name).finish()
    }
}

fn err<E: core::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn obj(rng: &mut ChaCha8Rng, prefix: &str) -> Vec<FinSet> {
    random::finsets(rng, 1, MAX_CARD, prefix)
}

fn zero_prob(rng: &mut ChaCha8Rng) -> f64 {
    [0.0, 0.2, 0.5][rng.gen_range(0..3)]
}

fn trace(f: &Kernel, w: usize) -> Result<Kernel, String> {
    causal_trace(f, w, &TOL).map_err(err)
}

fn diff(a: &Kernel, b: &Kernel) -> LawResult {
    a.max_abs_diff(b).map_err(err)
}

// ---- kernel trace axioms ----

pub fn trace_tightening(rng: &mut ChaCha8Rng) -> LawResult {
    let (x0, x, y, y0, w) = (obj(rng, "P"), obj(rng, "X"), obj(rng, "Y"), obj(rng, "Q"), obj(rng, "W"));
    let zp = zero_prob(rng);
    let f = random::nonsignalling(rng, &x, &w, &y, &w, zp).f;
    let g = random::kernel(rng, &x0, &x, zp);
    let h = random::kernel(rng, &y, &y0, zp);
    let id_w = Kernel::identity(&w);
    let inner = g.tensor(&id_w).then(&f).and_then(|k| k.then(&h.tensor(&id_w))).map_err(err)?;
    let lhs = trace(&inner, w.len())?;
    let rhs = g.then(&trace(&f, w.len())?).and_then(|k| k.then(&h)).map_err(err)?;
    diff(&lhs, &rhs)
}

pub fn trace_sliding(rng: &mut ChaCha8Rng) -> LawResult {
    let (x, y, u, v) = (obj(rng, "X"), obj(rng, "Y"), obj(rng, "U"), obj(rng, "V"));
    let zp = zero_prob(rng);
    let f = random::nonsignalling(rng, &x, &u, &y, &v, zp).f;
    let g = random::kernel(rng, &v, &u, zp);
    let lhs = trace(&f.then(&Kernel::identity(&y).tensor(&g)).map_err(err)?, u.len())?;
    let rhs = trace(&Kernel::identity(&x).tensor(&g).then(&f).map_err(err)?, v.len())?;
    diff(&lhs, &rhs)
}

pub fn trace_vanishing(rng: &mut ChaCha8Rng) -> LawResult {
    let (x, y) = (obj(rng, "X"), obj(rng, "Y"));
    let zp = zero_prob(rng);
    let f = random::kernel(rng, &x, &y, zp);
    let empty = diff(&trace(&f, 0)?, &f)?;
    // a one-element W is also a unit
    let one = [FinSet::new("I", 1).map_err(err)?];
    let padded = f.tensor(&Kernel::identity(&one));
    let unit = diff(&trace(&padded, 1)?, &f)?;
    Ok(empty.max(unit))
}

pub fn trace_associativity(rng: &mut ChaCha8Rng) -> LawResult {
    let (x, y, u, v) = (obj(rng, "X"), obj(rng, "Y"), obj(rng, "U"), obj(rng, "V"));
    let uv = [u.clone(), v.clone()].concat();
    let zp = zero_prob(rng);
    let f = random::nonsignalling(rng, &x, &uv, &y, &uv, zp).f;
    let lhs = trace(&f, 2)?;
    let rhs = trace(&trace(&f, 1)?, 1)?;
    diff(&lhs, &rhs)
}

pub fn trace_superposition(rng: &mut ChaCha8Rng) -> LawResult {
    let (a, b, x, y, w) = (obj(rng, "A"), obj(rng, "B"), obj(rng, "X"), obj(rng, "Y"), obj(rng, "W"));
    let zp = zero_prob(rng);
    let g = random::kernel(rng, &a, &b, zp);
    let f = random::nonsignalling(rng, &x, &w, &y, &w, zp).f;
    let lhs = trace(&g.tensor(&f), w.len())?;
    let rhs = g.tensor(&trace(&f, w.len())?);
    diff(&lhs, &rhs)
}

pub fn trace_yanking(rng: &mut ChaCha8Rng) -> LawResult {
    let len = rng.gen_range(1..=2);
    let w = random::finsets(rng, len, MAX_CARD, "W");
    let traced = trace(&Kernel::swap(&w, &w), w.len())?;
    diff(&traced, &Kernel::identity(&w))
}

/// Causal trace against the diagonal sum, plus normalisation of the result.
pub fn trace_diagonal_sum(rng: &mut ChaCha8Rng) -> LawResult {
    let (x, y, w) = (obj(rng, "X"), obj(rng, "Y"), obj(rng, "W"));
    let zp = zero_prob(rng);
    let f = random::nonsignalling(rng, &x, &w, &y, &w, zp).f;
    let traced = trace(&f, 1)?;
    let diag = mat_trace(&f, 1).map_err(err)?;
    let d = traced.max_abs_diff(&diag).map_err(err)?;
    let rows = traced
        .row_sums()
        .iter()
        .fold(0.0f64, |m, s| m.max((s - 1.0).abs()));
    Ok(d.max(rows))
}

/// Two disintegrations of the same kernel, differing arbitrarily where `f_s` vanishes, give the
/// same trace.
pub fn trace_well_defined(rng: &mut ChaCha8Rng) -> LawResult {
    let x = obj(rng, "X");
    let y = obj(rng, "Y");
    let w = [FinSet::new("W", rng.gen_range(2..=MAX_CARD)).map_err(err)?];
    let sample = loop {
        let s = random::nonsignalling(rng, &x, &w, &y, &w, 0.5);
        if s.f_s.data().contains(&0.0) {
            break s;
        }
    };
    let d1 = disintegrate(&sample.f, &sample.f_s, 1, &TOL).map_err(err)?;
    let (nx, nw) = (size(&x), size(&w));
    let ny = size(&y);
    let mut data = d1.f_p.data().to_vec();
    let mut perturbed = 0;
    for wv in 0..nw {
        for xv in 0..nx {
            if d1.f_s.get(xv, wv) > TOL.null {
                continue;
            }
            for wp in 0..nw {
                let row = (wv * nx + xv) * nw + wp;
                let fresh = random::distribution(rng, ny, 0.3);
                data[row * ny..(row + 1) * ny].copy_from_slice(&fresh);
                perturbed += 1;
            }
        }
    }
    if perturbed == 0 {
        return Err("no null cell to perturb".into());
    }
    let mut d2 = d1.clone();
    d2.f_p = Kernel::new(d1.f_p.dom().to_vec(), y.clone(), data).map_err(err)?;
    let valid = d2.recompose().map_err(err)?.max_abs_diff(&sample.f).map_err(err)?;
    if valid > TOL.eq {
        return Err(format!("perturbed disintegration no longer recomposes (residual {valid})"));
    }
    diff(&d1.trace().map_err(err)?, &d2.trace().map_err(err)?)
}

/// Random kernels, deterministic kernels and full-support kernels are atomic.
pub fn atomicity(rng: &mut ChaCha8Rng) -> LawResult {
    let a = random::object(rng, 2, MAX_CARD, "A");
    let x = random::object(rng, 2, MAX_CARD, "X");
    let zp = zero_prob(rng);
    let p = random::kernel(rng, &a, &x, zp);
    let det = random::deterministic(rng, &a, &x);
    let full = random::kernel(rng, &a, &x, 0.0);
    Ok(flag(is_atomic(&p, &TOL) && is_atomic(&det, &TOL) && is_atomic(&full, &TOL)))
}

pub fn conditional_recomposition(rng: &mut ChaCha8Rng) -> LawResult {
    let a = random::object(rng, 1, MAX_CARD, "A");
    let x = random::object(rng, 2, MAX_CARD, "X");
    let y = random::object(rng, 1, MAX_CARD, "Y");
    let zp = zero_prob(rng);
    let f = random::kernel(rng, &a, &[x.clone(), y].concat(), zp);
    let c = conditional(&f, x.len(), &TOL).map_err(err)?;
    conditional_residual(&f, x.len(), &c).map_err(err)
}

pub fn bayes_recomposition(rng: &mut ChaCha8Rng) -> LawResult {
    let a = random::object(rng, 1, MAX_CARD, "A");
    let x = random::object(rng, 2, MAX_CARD, "X");
    let y = random::object(rng, 1, MAX_CARD, "Y");
    let zp = zero_prob(rng);
    let f = random::kernel(rng, &x, &y, zp);
    let p = random::kernel(rng, &a, &x, zp);
    let inv = bayes_inverse(&f, &p, &TOL).map_err(err)?;
    bayes_residual(&f, &p, &inv).map_err(err)
}

// ---- free category ----

fn gen() -> DiagramGen {
    DiagramGen::standard()
}

fn types(rng: &mut ChaCha8Rng, g: &DiagramGen, min: usize, max: usize) -> Vec<TypeId> {
    g.types(rng, min, max)
}

fn dg<T, E: core::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(err)
}

pub fn free_category(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let (a, b, c, d) = (
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
    );
    let f = g.diagram_between(rng, &a, &b);
    let h = g.diagram_between(rng, &b, &c);
    let k = g.diagram_between(rng, &c, &d);
    let left_unit = dg(Diagram::identity(sig, &a))?.then(&f);
    let right_unit = f.then(&dg(Diagram::identity(sig, &b))?);
    let assoc_l = dg(dg(f.then(&h))?.then(&k))?;
    let assoc_r = dg(f.then(&dg(h.then(&k))?))?;
    Ok(flag(dg(left_unit)? == f && dg(right_unit)? == f && assoc_l == assoc_r))
}

pub fn free_monoidal(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let t: Vec<Vec<TypeId>> = (0..6).map(|_| types(rng, &g, 0, 2)).collect();
    let f = g.diagram_between(rng, &t[0], &t[1]);
    let h = g.diagram_between(rng, &t[1], &t[2]);
    let u = g.diagram_between(rng, &t[3], &t[4]);
    let v = g.diagram_between(rng, &t[4], &t[5]);
    // interchange
    let lhs = dg(dg(f.tensor(&u))?.then(&dg(h.tensor(&v))?))?;
    let rhs = dg(dg(f.then(&h))?.tensor(&dg(u.then(&v))?))?;
    let interchange = lhs == rhs;
    // unit and associativity of the tensor
    let unit = dg(f.tensor(&dg(Diagram::identity(sig, &[]))?))? == f;
    let assoc = dg(dg(f.tensor(&h))?.tensor(&u))? == dg(f.tensor(&dg(h.tensor(&u))?))?;
    // symmetry: involution and naturality
    let (a, b) = (&t[0], &t[3]);
    let sw = dg(Diagram::swap(sig, a, b))?;
    let back = dg(Diagram::swap(sig, b, a))?;
    let involution = dg(sw.then(&back))? == dg(Diagram::identity(sig, &[a.clone(), b.clone()].concat()))?;
    let natural_l = dg(dg(f.tensor(&u))?.then(&dg(Diagram::swap(sig, &t[1], &t[4]))?))?;
    let natural_r = dg(sw.then(&dg(u.tensor(&f))?))?;
    Ok(flag(interchange && unit && assoc && involution && natural_l == natural_r))
}

pub fn free_comonoid(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let x = rng.gen_range(0..sig.num_types());
    let copy = dg(Diagram::copy(sig, x))?;
    let del = dg(Diagram::del(sig, x))?;
    let id = dg(Diagram::identity(sig, &[x]))?;
    let counit_l = dg(copy.then(&dg(del.tensor(&id))?))? == id;
    let counit_r = dg(copy.then(&dg(id.tensor(&del))?))? == id;
    let comm = dg(copy.then(&dg(Diagram::swap(sig, &[x], &[x]))?))? == copy;
    let coassoc = dg(copy.then(&dg(copy.tensor(&id))?))? == dg(copy.then(&dg(id.tensor(&copy))?))?;
    // every diagram is discardable
    let f = g.diagram(rng);
    let discard = dg(f.then(&dg(Diagram::discard(sig, &f.cod()))?))? == dg(Diagram::discard(sig, &f.dom()))?;
    Ok(flag(counit_l && counit_r && comm && coassoc && discard))
}

/// Canonical forms of every terminal state reachable by eliminating eliminable boxes one at a
/// time, in every order. States are identified by the set of original boxes removed.
pub fn elimination_normal_forms(c: &Cospan) -> Result<Vec<Vec<u8>>, String> {
    fn walk(
        c: &Cospan,
        ids: &[usize],
        removed: BTreeSet<usize>,
        seen: &mut BTreeSet<BTreeSet<usize>>,
        out: &mut Vec<Vec<u8>>,
    ) -> Result<(), String> {
        if !seen.insert(removed.clone()) {
            return Ok(());
        }
        let elim = eliminable_boxes(c);
        if elim.is_empty() {
            let form = dg(Diagram::validate(c.clone()))?.canonical_form();
            if !out.contains(&form) {
                out.push(form);
            }
            return Ok(());
        }
        for b in elim {
            let next = eliminate_box(c, b);
            let mut next_ids = ids.to_vec();
            let orig = next_ids.remove(b);
            let mut r = removed.clone();
            r.insert(orig);
            walk(&next, &next_ids, r, seen, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    let ids: Vec<usize> = (0..c.apex.num_boxes()).collect();
    walk(c, &ids, BTreeSet::new(), &mut BTreeSet::new(), &mut out)?;
    Ok(out)
}

fn confluent(c: &Cospan) -> Result<bool, String> {
    let forms = elimination_normal_forms(c)?;
    let normal = dg(Diagram::normalize(c.clone()))?.canonical_form();
    Ok(forms.len() == 1 && forms[0] == normal)
}

/// All elimination orders on a random raw cospan with at most 4 boxes agree with `normalize`.
pub fn free_normalization(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let dom = types(rng, &g, 0, 2);
    let cod = types(rng, &g, 0, 2);
    let mut n = rng.gen_range(0..=4);
    // states added for the codomain can push the count over 4
    let c = loop {
        let c = g.raw_cospan(rng, &dom, &cod, 0, 0, n);
        if c.apex.num_boxes() <= 4 {
            break c;
        }
        n -= 1;
    };
    Ok(flag(confluent(&c)?))
}

/// The signature used by [`exhaustive_confluence`]: one type `X`, boxes `s : -> X`,
/// `f : X -> X`, `m : X, X -> X`.
pub fn small_signature() -> Signature {
    let mut s = Signature::new();
    s.add_type("X").unwrap();
    s.add_box_named("s", &[], &["X"]).unwrap();
    s.add_box_named("f", &["X"], &["X"]).unwrap();
    s.add_box_named("m", &["X", "X"], &["X"]).unwrap();
    s
}

/// Checks confluence on every cospan over [`small_signature`] with input boundary of length at
/// most 1, at most `max_boxes` boxes added in construction order, and output boundary of length
/// at most 2 drawn from the wires. Returns (instances checked, failures).
pub fn exhaustive_confluence(max_boxes: usize) -> Result<(usize, usize), String> {
    let sig = Arc::new(small_signature());
    let mut checked = 0;
    let mut failures = 0;
    for dom_len in 0..=1 {
        let mut g = Hypergraph::empty(sig.clone());
        for _ in 0..dom_len {
            g.add_wire(0).map_err(err)?;
        }
        let left: Vec<usize> = (0..dom_len).collect();
        let mut stack = vec![g];
        while let Some(g) = stack.pop() {
            let nw = g.num_wires();
            let mut rights: Vec<Vec<usize>> = vec![Vec::new()];
            rights.extend((0..nw).map(|w| vec![w]));
            rights.extend((0..nw).flat_map(|a| (0..nw).map(move |b| vec![a, b])));
            for right in rights {
                let c = Cospan::new(g.clone(), left.clone(), right).map_err(err)?;
                checked += 1;
                if !confluent(&c)? {
                    failures += 1;
                }
            }
            if g.num_boxes() == max_boxes {
                continue;
            }
            for label in 0..sig.num_boxes() {
                let arity = sig.box_sig(label).inputs.len();
                let choices = nw.pow(arity as u32);
                for choice in 0..choices {
                    let inputs: Vec<usize> = (0..arity).map(|i| (choice / nw.pow(i as u32)) % nw).collect();
                    let mut next = g.clone();
                    let out = next.add_wire(0).map_err(err)?;
                    next.add_box(label, inputs, vec![out]).map_err(err)?;
                    stack.push(next);
                }
            }
        }
    }
    Ok((checked, failures))
}

fn partition(d: Diagram, w: usize) -> Result<TracePartition, String> {
    TracePartition::new(d, w).map_err(err)
}

fn contracted(d: Diagram, w: usize) -> Result<Diagram, String> {
    contract(&partition(d, w)?).map_err(err)
}

pub fn contraction_tightening(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let (x0, x, y, y0) = (
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
        types(rng, &g, 0, 2),
    );
    let w = types(rng, &g, 1, 2);
    let f = g.nonsignalling(rng, &x, &y, &w);
    let pre = g.diagram_between(rng, &x0, &x);
    let post = g.diagram_between(rng, &y, &y0);
    let id_w = dg(Diagram::identity(sig, &w))?;
    let inner = dg(dg(dg(pre.tensor(&id_w))?.then(&f))?.then(&dg(post.tensor(&id_w))?))?;
    let lhs = contracted(inner, w.len())?;
    let rhs = dg(dg(pre.then(&contracted(f, w.len())?))?.then(&post))?;
    Ok(flag(lhs == rhs))
}

pub fn contraction_sliding(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let (x, y) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let (u, v) = (types(rng, &g, 1, 2), types(rng, &g, 1, 2));
    let f = g.nonsignalling_between(rng, &[x.clone(), u.clone()].concat(), &[y.clone(), v.clone()].concat(), u.len(), v.len());
    let s = g.diagram_between(rng, &v, &u);
    let lhs = contracted(dg(f.then(&dg(dg(Diagram::identity(sig, &y))?.tensor(&s))?))?, u.len())?;
    let rhs = contracted(dg(dg(dg(Diagram::identity(sig, &x))?.tensor(&s))?.then(&f))?, v.len())?;
    Ok(flag(lhs == rhs))
}

pub fn contraction_vanishing(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let f = g.diagram(rng);
    Ok(flag(contracted(f.clone(), 0)? == f))
}

pub fn contraction_associativity(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let (x, y) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let u = types(rng, &g, 1, 2);
    let v = types(rng, &g, 1, 2);
    let uv = [u.clone(), v.clone()].concat();
    let f = g.nonsignalling(rng, &x, &y, &uv);
    let whole = contracted(f.clone(), uv.len())?;
    let stepwise = contracted(contracted(f, v.len())?, u.len())?;
    Ok(flag(whole == stepwise))
}

pub fn contraction_superposition(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let h = g.diagram(rng);
    let (x, y) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let w = types(rng, &g, 1, 2);
    let f = g.nonsignalling(rng, &x, &y, &w);
    let lhs = contracted(dg(h.tensor(&f))?, w.len())?;
    let rhs = dg(h.tensor(&contracted(f, w.len())?))?;
    Ok(flag(lhs == rhs))
}

pub fn contraction_yanking(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let w = types(rng, &g, 1, 3);
    let sw = dg(Diagram::swap(sig, &w, &w))?;
    Ok(flag(contracted(sw, w.len())? == dg(Diagram::identity(sig, &w))?))
}

/// Contracting `k + 1` feedback wires at once equals contracting the last one and then `k`.
pub fn contraction_induction(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let (x, y) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let w = types(rng, &g, 2, 3);
    let f = g.nonsignalling(rng, &x, &y, &w);
    let k = w.len() - 1;
    let whole = contracted(f.clone(), k + 1)?;
    let stepwise = contracted(contracted(f, 1)?, k)?;
    Ok(flag(whole == stepwise))
}

// ---- semantics ----

fn model(rng: &mut ChaCha8Rng, g: &DiagramGen) -> Model {
    random::model(rng, &g.sig, 3, 0.3)
}

/// `⟦contr_w(f)⟧` equals the causal trace of `⟦f⟧`.
pub fn soundness_trace(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let (x, y) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let w = types(rng, &g, 1, 2);
    let f = g.nonsignalling(rng, &x, &y, &w);
    let m = model(rng, &g);
    match check_trace_soundness(&partition(f, w.len())?, &m, &TOL).map_err(err)? {
        SoundnessVerdict::Holds { residual, .. } => Ok(residual),
        SoundnessVerdict::Mismatch { residual, .. } => Ok(residual),
        SoundnessVerdict::SemanticallySignalling => Err("interpretation is signalling".into()),
    }
}

/// The interpretation preserves composition, tensor and the structural generators.
pub fn soundness_functoriality(rng: &mut ChaCha8Rng) -> LawResult {
    let g = gen();
    let sig = &g.sig;
    let m = model(rng, &g);
    let ev = |d: &Diagram| interpret(d, &m, &TOL).map_err(err);
    let (a, b, c) = (types(rng, &g, 0, 2), types(rng, &g, 0, 2), types(rng, &g, 0, 2));
    let f = g.diagram_between(rng, &a, &b);
    let h = g.diagram_between(rng, &b, &c);
    let u = g.diagram(rng);
    let mut worst: f64 = 0.0;
    let seq = ev(&dg(f.then(&h))?)?;
    worst = worst.max(diff(&seq, &ev(&f)?.then(&ev(&h)?).map_err(err)?)?);
    let par = ev(&dg(f.tensor(&u))?)?;
    worst = worst.max(diff(&par, &ev(&f)?.tensor(&ev(&u)?))?);
    let x = rng.gen_range(0..sig.num_types());
    let sx = m.sets(&[x]);
    let sa = m.sets(&a);
    worst = worst.max(diff(&ev(&dg(Diagram::identity(sig, &a))?)?, &Kernel::identity(&sa))?);
    worst = worst.max(diff(&ev(&dg(Diagram::copy(sig, x))?)?, &Kernel::copy(&sx))?);
    worst = worst.max(diff(&ev(&dg(Diagram::del(sig, x))?)?, &Kernel::del(&sx))?);
    worst = worst.max(diff(&ev(&dg(Diagram::swap(sig, &a, &[x]))?)?, &Kernel::swap(&sa, &sx))?);
    Ok(worst)
}

/// The contraction identity in the shape `(p ⊗ id) ; (copy ⊗ id) ; (id ⊗ swap) ; (f ⊗ id)`
/// with two interpretations of `f` that agree wherever `p` has mass.
pub fn contraction_identity(rng: &mut ChaCha8Rng) -> LawResult {
    let (c1, c2, m) = contraction_identity_instance(rng)?;
    match check_contraction_identity(&c1, &c2, &m, &TOL).map_err(err)? {
        IdentityVerdict::Holds { residual } => Ok(residual),
        IdentityVerdict::Vacuous { premise_residual } => Err(format!("premise fails by {premise_residual}")),
        IdentityVerdict::Violation { residual, .. } => Ok(residual),
    }
}

/// Signature with types `X, Y` and boxes `p : -> X`, `f1, f2 : X, X -> Y`.
pub fn identity_signature() -> Signature {
    let mut s = Signature::new();
    s.add_type("X").unwrap();
    s.add_type("Y").unwrap();
    s.add_box_named("p", &[], &["X"]).unwrap();
    s.add_box_named("f1", &["X", "X"], &["Y"]).unwrap();
    s.add_box_named("f2", &["X", "X"], &["Y"]).unwrap();
    s
}

/// `X -> Y ⊗ X`: draws `x` from `p`, outputs `f(x, x_in)` and `x`.
pub fn identity_shape(sig: &Arc<Signature>, f: &str) -> Result<Diagram, String> {
    let x = sig.type_id("X").ok_or("missing type X")?;
    let id = dg(Diagram::identity(sig, &[x]))?;
    let p = dg(Diagram::generator_named(sig, "p"))?;
    let fb = dg(Diagram::generator_named(sig, f))?;
    let steps = [
        dg(p.tensor(&id))?,
        dg(dg(Diagram::copy(sig, x))?.tensor(&id))?,
        dg(id.tensor(&dg(Diagram::swap(sig, &[x], &[x]))?))?,
        dg(fb.tensor(&id))?,
    ];
    let mut d = steps[0].clone();
    for s in &steps[1..] {
        d = dg(d.then(s))?;
    }
    Ok(d)
}

/// Two partitions of the identity shape and a model in which `⟦f2⟧` is `⟦f1⟧` changed on the
/// rows whose first argument is outside the support of `⟦p⟧`.
pub fn contraction_identity_instance(
    rng: &mut ChaCha8Rng,
) -> Result<(TracePartition, TracePartition, Model), String> {
    let sig = Arc::new(identity_signature());
    let nx = rng.gen_range(2..=MAX_CARD);
    let ny = rng.gen_range(1..=MAX_CARD);
    let x = [FinSet::new("X", nx).map_err(err)?];
    let y = [FinSet::new("Y", ny).map_err(err)?];
    let p = loop {
        let p = random::kernel(rng, &[], &x, 0.5);
        if p.data().contains(&0.0) {
            break p;
        }
    };
    let xx = [x[0].clone(), x[0].clone()];
    let zp = zero_prob(rng);
    let f1 = random::kernel(rng, &xx, &y, zp);
    let mut data = f1.data().to_vec();
    for xv in (0..nx).filter(|&xv| p.get(0, xv) == 0.0) {
        for xin in 0..nx {
            let row = xv * nx + xin;
            data[row * ny..(row + 1) * ny].copy_from_slice(&random::distribution(rng, ny, 0.3));
        }
    }
    let f2 = Kernel::new(xx.to_vec(), y.to_vec(), data).map_err(err)?;
    let m = Model::new(sig.clone(), vec![nx, ny], vec![p, f1, f2]).map_err(err)?;
    let c1 = partition(identity_shape(&sig, "f1")?, 1)?;
    let c2 = partition(identity_shape(&sig, "f2")?, 1)?;
    Ok((c1, c2, m))
}

// ---- combs ----

fn shape(rng: &mut ChaCha8Rng) -> CombShape {
    CombShape::random(rng, 3)
}

/// The extension of the comb built from a non-signalling kernel is that kernel.
pub fn comb_roundtrip(rng: &mut ChaCha8Rng) -> LawResult {
    let s = shape(rng);
    let zp = zero_prob(rng);
    let sample = random::nonsignalling(rng, &s.a, &s.b_out, &s.a_out, &s.b, zp);
    let c = Comb::from_nonsignalling(&sample.f, s.b_out.len(), s.b.len(), &TOL).map_err(err)?;
    diff(&c.extension().map_err(err)?, &sample.f)
}

/// Extensionally equal combs (a random comb and the one rebuilt from its extension) agree on
/// random contexts.
pub fn comb_contexts(rng: &mut ChaCha8Rng) -> LawResult {
    comb_context_audit(rng, 50)
}

pub fn comb_context_audit(rng: &mut ChaCha8Rng, contexts: usize) -> LawResult {
    let s = shape(rng);
    let zp = zero_prob(rng);
    let c1 = random::comb(rng, &s, 3, zp);
    let ext = c1.extension().map_err(err)?;
    let c2 = Comb::from_nonsignalling(&ext, s.b_out.len(), s.b.len(), &TOL).map_err(err)?;
    let mut worst = diff(&c2.extension().map_err(err)?, &ext)?;
    for _ in 0..contexts {
        let h = random_context(rng, &s.b, &s.b_out, 3);
        let r = diff(&c1.insert(&h).map_err(err)?, &c2.insert(&h).map_err(err)?)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Combs related by sliding have equal extensions.
pub fn comb_sliding(rng: &mut ChaCha8Rng) -> LawResult {
    let s = shape(rng);
    let zp = zero_prob(rng);
    let (c1, c2) = random::sliding_pair(rng, &s, 3, zp);
    diff(&c1.extension().map_err(err)?, &c2.extension().map_err(err)?)
}

pub const LAWS: &[Law] = &[
    Law { name: "trace.tightening", tolerance: 1e-8, check: trace_tightening },
    Law { name: "trace.sliding", tolerance: 1e-8, check: trace_sliding },
    Law { name: "trace.vanishing", tolerance: 1e-8, check: trace_vanishing },
    Law { name: "trace.associativity", tolerance: 1e-8, check: trace_associativity },
    Law { name: "trace.superposition", tolerance: 1e-8, check: trace_superposition },
    Law { name: "trace.yanking", tolerance: 0.0, check: trace_yanking },
    Law { name: "trace.diagonal_sum", tolerance: 1e-9, check: trace_diagonal_sum },
    Law { name: "trace.well_defined", tolerance: 1e-12, check: trace_well_defined },
    Law { name: "kernel.atomicity", tolerance: 0.0, check: atomicity },
    Law { name: "kernel.conditional", tolerance: 1e-9, check: conditional_recomposition },
    Law { name: "kernel.bayes", tolerance: 1e-9, check: bayes_recomposition },
    Law { name: "free.category", tolerance: 0.0, check: free_category },
    Law { name: "free.monoidal", tolerance: 0.0, check: free_monoidal },
    Law { name: "free.comonoid", tolerance: 0.0, check: free_comonoid },
    Law { name: "free.normalization", tolerance: 0.0, check: free_normalization },
    Law { name: "contraction.tightening", tolerance: 0.0, check: contraction_tightening },
    Law { name: "contraction.sliding", tolerance: 0.0, check: contraction_sliding },
    Law { name: "contraction.vanishing", tolerance: 0.0, check: contraction_vanishing },
    Law { name: "contraction.associativity", tolerance: 0.0, check: contraction_associativity },
    Law { name: "contraction.superposition", tolerance: 0.0, check: contraction_superposition },
    Law { name: "contraction.yanking", tolerance: 0.0, check: contraction_yanking },
    Law { name: "contraction.induction", tolerance: 0.0, check: contraction_induction },
    Law { name: "contraction.identity", tolerance: 1e-8, check: contraction_identity },
    Law { name: "soundness.trace", tolerance: 1e-8, check: soundness_trace },
    Law { name: "soundness.functoriality", tolerance: 1e-9, check: soundness_functoriality },
    Law { name: "comb.roundtrip", tolerance: 1e-9, check: comb_roundtrip },
    Law { name: "comb.contexts", tolerance: 1e-8, check: comb_contexts },
    Law { name: "comb.sliding", tolerance: 1e-9, check: comb_sliding },
];

/// Result of running one law over many cases.
#[derive(Debug, Clone, PartialEq)]
pub struct LawOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub cases: usize,
    pub violations: usize,
    pub max_residual: f64,
    /// Seed and message of the first violating case.
    pub first_failure: Option<(u64, String)>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Runs `law` on `cases` instances; case `i` uses the rng seeded with
/// `case_seed(seed, stream, i)`.
pub fn run_law(law: &Law, stream: u64, seed: u64, cases: usize) -> LawOutcome {
    let mut out = LawOutcome {
        name: law.name,
        tolerance: law.tolerance,
        cases,
        violations: 0,
        max_residual: 0.0,
        first_failure: None,
    };
    for i in 0..cases {
        let s = case_seed(seed, stream, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let failure = match (law.check)(&mut rng) {
            Ok(r) => {
                out.max_residual = out.max_residual.max(r);
                (r > law.tolerance || r.is_nan()).then(|| format!("residual {r:e}"))
            }
            Err(e) => Some(e),
        };
        if let Some(msg) = failure {
            out.violations += 1;
            if out.first_failure.is_none() {
                out.first_failure = Some((s, msg));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub seed: u64,
    pub cases: usize,
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn violations(&self) -> usize {
        self.outcomes.iter().map(|o| o.violations).sum()
    }
}

/// Runs every law in [`LAWS`].
pub fn run_suite(seed: u64, cases: usize) -> LawReport {
    LawReport {
        seed,
        cases,
        outcomes: LAWS
            .iter()
            .enumerate()
            .map(|(i, law)| run_law(law, i as u64, seed, cases))
            .collect(),
    }
}
