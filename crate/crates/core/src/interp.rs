//! Interpreting diagrams as kernels: a model fixes a finite set for every type and a kernel for
//! every box, and a diagram is evaluated as a tensor network in Mat(ℝ⁺).

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::contraction::{contract, is_nonsignalling, ContractionError, TracePartition};
use crate::diagram::Diagram;
use crate::hypergraph::{same_signature, Signature, TypeId};
use crate::stoch::{causal_trace, is_nonsignalling_sem, size, FinSet, Kernel, NonnegMatrix, StochError, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model gives {found} cardinalities for {expected} types")]
    CardinalityCount { expected: usize, found: usize },
    #[error("model gives {found} kernels for {expected} boxes")]
    KernelCount { expected: usize, found: usize },
    #[error("no kernel for box `{0}`")]
    MissingBox(String),
    #[error("no cardinality for type `{0}`")]
    MissingType(String),
    #[error("kernel for box `{0}` does not match its declared types")]
    KernelShape(String),
    #[error("diagram and model use different signatures")]
    SignatureMismatch,
    #[error("evaluation produced a non-stochastic matrix (row {row} sums to {sum})")]
    NonStochastic { row: usize, sum: f64 },
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

/// An interpretation of a signature in finite stochastic kernels.
#[derive(Debug, Clone)]
pub struct Model {
    sig: Arc<Signature>,
    sets: Vec<FinSet>,
    kernels: Vec<Kernel>,
}

impl Model {
    /// `cards[t]` is the cardinality of type `t`, `kernels[b]` the kernel of box `b`.
    pub fn new(sig: Arc<Signature>, cards: Vec<usize>, kernels: Vec<Kernel>) -> Result<Model, ModelError> {
        if cards.len() != sig.num_types() {
            return Err(ModelError::CardinalityCount {
                expected: sig.num_types(),
                found: cards.len(),
            });
        }
        if kernels.len() != sig.num_boxes() {
            return Err(ModelError::KernelCount {
                expected: sig.num_boxes(),
                found: kernels.len(),
            });
        }
        let sets = sig
            .types()
            .iter()
            .zip(&cards)
            .map(|(n, &c)| FinSet::new(n, c))
            .collect::<Result<Vec<_>, _>>()?;
        let model = Model { sig, sets, kernels };
        for (b, k) in model.kernels.iter().enumerate() {
            let bs = model.sig.box_sig(b);
            let cards_of = |ts: &[TypeId]| ts.iter().map(|&t| model.sets[t].card()).collect::<Vec<_>>();
            let found = |fs: &[FinSet]| fs.iter().map(FinSet::card).collect::<Vec<_>>();
            if cards_of(&bs.inputs) != found(k.dom()) || cards_of(&bs.outputs) != found(k.cod()) {
                return Err(ModelError::KernelShape(bs.name.clone()));
            }
        }
        Ok(model)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn set(&self, t: TypeId) -> &FinSet {
        &self.sets[t]
    }

    pub fn sets(&self, types: &[TypeId]) -> Vec<FinSet> {
        types.iter().map(|&t| self.sets[t].clone()).collect()
    }

    pub fn kernel(&self, b: usize) -> &Kernel {
        &self.kernels[b]
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }
}

/// A dense tensor over distinct wire variables, last variable fastest.
#[derive(Debug, Clone)]
struct Tensor {
    vars: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    fn scalar(v: f64) -> Tensor {
        Tensor {
            vars: Vec::new(),
            dims: Vec::new(),
            data: vec![v],
        }
    }

    fn offset(&self, value: &[usize]) -> usize {
        self.vars
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&v, &d)| acc * d + value[v])
    }
}

/// Odometer over `dims`, calling `f` with the assignment written into `value` at `vars`.
fn for_each_assignment(vars: &[usize], dims: &[usize], value: &mut [usize], mut f: impl FnMut(&[usize])) {
    for &v in vars {
        value[v] = 0;
    }
    if dims.contains(&0) {
        return;
    }
    loop {
        f(value);
        let mut i = vars.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            value[vars[i]] += 1;
            if value[vars[i]] < dims[i] {
                break;
            }
            value[vars[i]] = 0;
        }
    }
}

fn box_tensor(kernel: &Kernel, inputs: &[usize], outputs: &[usize], card: &[usize]) -> Tensor {
    let mut vars: Vec<usize> = Vec::new();
    for &w in inputs.iter().chain(outputs) {
        if !vars.contains(&w) {
            vars.push(w);
        }
    }
    let dims: Vec<usize> = vars.iter().map(|&w| card[w]).collect();
    let mut value = vec![0; card.len()];
    let mut data = Vec::with_capacity(dims.iter().product());
    let flat = |ws: &[usize], value: &[usize]| ws.iter().fold(0, |acc, &w| acc * card[w] + value[w]);
    for_each_assignment(&vars, &dims, &mut value, |v| {
        data.push(kernel.get(flat(inputs, v), flat(outputs, v)));
    });
    Tensor { vars, dims, data }
}

/// Contracts `a` and `b`, summing out `summed`.
fn merge(a: &Tensor, b: &Tensor, summed: &[usize], card: &[usize]) -> Tensor {
    let mut vars: Vec<usize> = Vec::new();
    for &v in a.vars.iter().chain(&b.vars) {
        if !vars.contains(&v) && !summed.contains(&v) {
            vars.push(v);
        }
    }
    let dims: Vec<usize> = vars.iter().map(|&w| card[w]).collect();
    let sdims: Vec<usize> = summed.iter().map(|&w| card[w]).collect();
    let mut value = vec![0; card.len()];
    let mut data = Vec::with_capacity(dims.iter().product());
    let mut inner = vec![0; card.len()];
    for_each_assignment(&vars, &dims, &mut value, |v| {
        inner.copy_from_slice(v);
        let mut acc = 0.0;
        for_each_assignment(summed, &sdims, &mut inner, |u| {
            acc += a.data[a.offset(u)] * b.data[b.offset(u)];
        });
        data.push(acc);
    });
    Tensor { vars, dims, data }
}

fn sum_out(t: &Tensor, summed: &[usize], card: &[usize]) -> Tensor {
    merge(t, &Tensor::scalar(1.0), summed, card)
}

/// Evaluates `d` under `model` as a tensor network, contracting greedily by smallest
/// intermediate. The result is checked to be row-stochastic within `tol.row`.
pub fn interpret(d: &Diagram, model: &Model, tol: &Tolerances) -> Result<Kernel, ModelError> {
    if !same_signature(d.signature(), &model.sig) {
        return Err(ModelError::SignatureMismatch);
    }
    let c = d.cospan();
    let g = &c.apex;
    let card: Vec<usize> = g.wire_labels().iter().map(|&t| model.sets[t].card()).collect();
    let mut keep = vec![false; g.num_wires()];
    for &w in c.left.iter().chain(&c.right) {
        keep[w] = true;
    }

    let mut tensors: Vec<Tensor> = g
        .boxes()
        .iter()
        .map(|b| box_tensor(&model.kernels[b.label], &b.inputs, &b.outputs, &card))
        .collect();
    // wires that occur in exactly the given tensors and nowhere else may be summed out
    let summable = |tensors: &[Tensor], skip: &[usize], v: usize| {
        !keep[v]
            && tensors
                .iter()
                .enumerate()
                .all(|(i, t)| skip.contains(&i) || !t.vars.contains(&v))
    };
    while tensors.len() > 1 {
        let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
        for i in 0..tensors.len() {
            for j in i + 1..tensors.len() {
                let mut union: Vec<usize> = tensors[i].vars.clone();
                union.extend(tensors[j].vars.iter().filter(|v| !tensors[i].vars.contains(v)));
                let summed: Vec<usize> = union
                    .iter()
                    .copied()
                    .filter(|&v| summable(&tensors, &[i, j], v))
                    .collect();
                let cost: usize = union
                    .iter()
                    .filter(|v| !summed.contains(v))
                    .map(|&v| card[v])
                    .product();
                if best.as_ref().is_none_or(|b| cost < b.2) {
                    best = Some((i, j, cost, summed));
                }
            }
        }
        let (i, j, _, summed) = best.unwrap();
        let merged = merge(&tensors[i], &tensors[j], &summed, &card);
        tensors.swap_remove(j);
        tensors.swap_remove(i);
        tensors.push(merged);
    }
    let mut t = tensors.pop().unwrap_or_else(|| Tensor::scalar(1.0));
    let dangling: Vec<usize> = t.vars.iter().copied().filter(|&v| !keep[v]).collect();
    if !dangling.is_empty() {
        t = sum_out(&t, &dangling, &card);
    }

    let dom = model.sets(&c.dom_types());
    let cod = model.sets(&c.cod_types());
    let (nx, ny) = (size(&dom), size(&cod));
    let mut data = Vec::with_capacity(nx * ny);
    let mut value: Vec<Option<usize>> = vec![None; g.num_wires()];
    let mut dense = vec![0; g.num_wires()];
    for x in 0..nx {
        for y in 0..ny {
            value.iter_mut().for_each(|v| *v = None);
            let mut consistent = true;
            let mut assign = |w: usize, k: usize, value: &mut Vec<Option<usize>>| match value[w] {
                Some(prev) if prev != k => consistent = false,
                _ => value[w] = Some(k),
            };
            let mut rest = x;
            for &w in c.left.iter().rev() {
                assign(w, rest % card[w], &mut value);
                rest /= card[w];
            }
            let mut rest = y;
            for &w in c.right.iter().rev() {
                assign(w, rest % card[w], &mut value);
                rest /= card[w];
            }
            let entry = if consistent {
                for (w, v) in value.iter().enumerate() {
                    dense[w] = v.unwrap_or(0);
                }
                t.data[t.offset(&dense)]
            } else {
                0.0
            };
            data.push(entry);
        }
    }
    let m = NonnegMatrix::new(dom, cod, data)?;
    for (row, sum) in m.row_sums().into_iter().enumerate() {
        if (sum - 1.0).abs() > tol.row {
            return Err(ModelError::NonStochastic { row, sum });
        }
    }
    Ok(Kernel::from_matrix(m, tol)?)
}

/// Outcome of comparing `⟦contr_w(f)⟧` with the causal trace of `⟦f⟧`.
#[derive(Debug, Clone)]
pub enum SoundnessVerdict {
    Holds { contracted: Kernel, residual: f64 },
    /// The interpreted kernel fails the semantic non-signalling check although the diagram
    /// passes the structural one.
    SemanticallySignalling,
    Mismatch {
        contracted: Kernel,
        traced: Kernel,
        residual: f64,
    },
}

impl SoundnessVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SoundnessVerdict::Holds { .. })
    }
}

/// Evaluates the contraction of `t` and the causal trace of the evaluation of `t`, and compares
/// them within `tol.eq`.
pub fn check_trace_soundness(
    t: &TracePartition,
    model: &Model,
    tol: &Tolerances,
) -> Result<SoundnessVerdict, ModelError> {
    if !is_nonsignalling(t) {
        return Err(ContractionError::SignallingInput.into());
    }
    let contracted = interpret(&contract(t)?, model, tol)?;
    let whole = interpret(t.diagram(), model, tol)?;
    let w = t.feedback();
    if is_nonsignalling_sem(&whole, w, w, tol)?.is_none() {
        return Ok(SoundnessVerdict::SemanticallySignalling);
    }
    let traced = causal_trace(&whole, w, tol)?;
    let residual = contracted.max_abs_diff(&traced)?;
    if residual <= tol.eq {
        Ok(SoundnessVerdict::Holds { contracted, residual })
    } else {
        Ok(SoundnessVerdict::Mismatch {
            contracted,
            traced,
            residual,
        })
    }
}

/// Outcome of checking one instance of a contraction identity.
#[derive(Debug, Clone)]
pub enum IdentityVerdict {
    Holds { residual: f64 },
    /// The premise `⟦C1⟧ = ⟦C2⟧` fails, so the implication holds trivially.
    Vacuous { premise_residual: f64 },
    Violation { lhs: Kernel, rhs: Kernel, residual: f64 },
}

/// If `⟦C1⟧ = ⟦C2⟧` then `⟦contr_w(C1)⟧ = ⟦contr_w(C2)⟧`, for one model.
pub fn check_contraction_identity(
    c1: &TracePartition,
    c2: &TracePartition,
    model: &Model,
    tol: &Tolerances,
) -> Result<IdentityVerdict, ModelError> {
    let (d1, d2) = (c1.diagram(), c2.diagram());
    if d1.dom() != d2.dom() || d1.cod() != d2.cod() || c1.feedback() != c2.feedback() {
        return Err(ContractionError::FeedbackTypeMismatch.into());
    }
    let (k1, k2) = (interpret(d1, model, tol)?, interpret(d2, model, tol)?);
    let premise_residual = k1.max_abs_diff(&k2)?;
    if premise_residual > tol.eq {
        return Ok(IdentityVerdict::Vacuous { premise_residual });
    }
    let lhs = interpret(&contract(c1)?, model, tol)?;
    let rhs = interpret(&contract(c2)?, model, tol)?;
    let residual = lhs.max_abs_diff(&rhs)?;
    if residual <= tol.eq {
        Ok(IdentityVerdict::Holds { residual })
    } else {
        Ok(IdentityVerdict::Violation { lhs, rhs, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, DiagramGen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: Tolerances = Tolerances::DEFAULT;

    /// Brute force: sum over every assignment of every wire.
    fn brute(d: &Diagram, model: &Model) -> Vec<f64> {
        let c = d.cospan();
        let g = &c.apex;
        let card: Vec<usize> = g.wire_labels().iter().map(|&t| model.set(t).card()).collect();
        let dom = model.sets(&d.dom());
        let cod = model.sets(&d.cod());
        let (nx, ny) = (size(&dom), size(&cod));
        let mut out = vec![0.0; nx * ny];
        let vars: Vec<usize> = (0..g.num_wires()).collect();
        let mut value = vec![0; g.num_wires()];
        let flat = |ws: &[usize], v: &[usize]| ws.iter().fold(0, |acc, &w| acc * card[w] + v[w]);
        for_each_assignment(&vars, &card, &mut value, |v| {
            let mut p = 1.0;
            for b in g.boxes() {
                p *= model.kernel(b.label).get(flat(&b.inputs, v), flat(&b.outputs, v));
            }
            out[flat(&c.left, v) * ny + flat(&c.right, v)] += p;
        });
        out
    }

    #[test]
    fn greedy_contraction_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen = DiagramGen::standard();
        for _ in 0..200 {
            let d = gen.diagram(&mut rng);
            let m = random::model(&mut rng, &gen.sig, 3, 0.2);
            let k = interpret(&d, &m, &TOL).unwrap();
            let b = brute(&d, &m);
            for (a, b) in k.data().iter().zip(&b) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn structural_generators_evaluate_to_structural_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let gen = DiagramGen::standard();
        let sig = &gen.sig;
        let m = random::model(&mut rng, sig, 3, 0.0);
        let (x, y) = (0, 1);
        let sx = m.sets(&[x]);
        let sxy = m.sets(&[x, y]);
        let id = interpret(&Diagram::identity(sig, &[x, y]).unwrap(), &m, &TOL).unwrap();
        assert_eq!(id, Kernel::identity(&sxy));
        let copy = interpret(&Diagram::copy(sig, x).unwrap(), &m, &TOL).unwrap();
        assert_eq!(copy, Kernel::copy(&sx));
        let del = interpret(&Diagram::del(sig, x).unwrap(), &m, &TOL).unwrap();
        assert_eq!(del, Kernel::del(&sx));
        let swap = interpret(&Diagram::swap(sig, &[x], &[y]).unwrap(), &m, &TOL).unwrap();
        assert_eq!(swap, Kernel::swap(&sx, &m.sets(&[y])));
    }

    #[test]
    fn mismatched_models_are_rejected() {
        let gen = DiagramGen::standard();
        let r = Model::new(gen.sig.clone(), vec![2], Vec::new());
        assert!(matches!(r, Err(ModelError::CardinalityCount { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let good = random::model(&mut rng, &gen.sig, 2, 0.0);
        let mut kernels = good.kernels().to_vec();
        kernels[0] = Kernel::identity(&[FinSet::new("Z", 5).unwrap()]);
        let r = Model::new(gen.sig.clone(), vec![2, 2], kernels);
        assert!(matches!(r, Err(ModelError::KernelShape(_))));
    }

    #[test]
    fn identical_partitions_hold_and_unequal_ones_are_vacuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gen = DiagramGen::standard();
        let m = random::model(&mut rng, &gen.sig, 3, 0.0);
        let d = gen.nonsignalling(&mut rng, &[0], &[1], &[0]);
        let t = TracePartition::new(d, 1).unwrap();
        assert!(matches!(
            check_contraction_identity(&t, &t, &m, &TOL).unwrap(),
            IdentityVerdict::Holds { .. }
        ));
        // p and f;f...: two different states of X with a random model differ generically
        let sig = &gen.sig;
        let p = Diagram::generator_named(sig, "p").unwrap();
        let pf = p.then(&Diagram::generator_named(sig, "f").unwrap()).unwrap();
        let a = TracePartition::new(p, 0).unwrap();
        let b = TracePartition::new(pf, 0).unwrap();
        let mut m2 = random::model(&mut rng, sig, 3, 0.0);
        while m2.set(0).card() < 2 {
            m2 = random::model(&mut rng, sig, 3, 0.0);
        }
        assert!(matches!(
            check_contraction_identity(&a, &b, &m2, &TOL).unwrap(),
            IdentityVerdict::Vacuous { .. }
        ));
    }

    #[test]
    fn swap_trace_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = DiagramGen::standard();
        let m = random::model(&mut rng, &gen.sig, 3, 0.0);
        let sw = Diagram::swap(&gen.sig, &[0], &[0]).unwrap();
        let v = check_trace_soundness(&TracePartition::new(sw, 1).unwrap(), &m, &TOL).unwrap();
        match v {
            SoundnessVerdict::Holds { contracted, .. } => {
                assert_eq!(contracted, Kernel::identity(&m.sets(&[0])))
            }
            other => panic!("{other:?}"),
        }
    }
}
