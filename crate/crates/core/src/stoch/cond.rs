//! Supports, almost-sure equality, atomicity, conditionals and Bayesian inverses.

use alloc::vec::Vec;

use super::{same_dims, size, FinSet, Kernel, NonnegMatrix, StochError, Tolerances};

/// Output indices that receive mass above `tol.supp` from some input.
pub fn support(p: &NonnegMatrix, tol: &Tolerances) -> Vec<usize> {
    (0..p.cols())
        .filter(|&c| (0..p.rows()).any(|r| p.get(r, c) > tol.supp))
        .collect()
}

/// `f1 =_p f2` for `f1, f2 : W ⊗ X -> Y` and `p : A -> X`: the rows agree within `tol.eq` for
/// every `w` and every `x` in the support of `p`. The trailing `p.cod().len()` input factors of
/// `f1` are the `X` factors.
pub fn as_equal(
    f1: &Kernel,
    f2: &Kernel,
    p: &Kernel,
    tol: &Tolerances,
) -> Result<bool, StochError> {
    same_dims("almost-sure equality", f1.dom(), f2.dom())?;
    same_dims("almost-sure equality", f1.cod(), f2.cod())?;
    let k = p.cod().len();
    if k > f1.dom().len() {
        return Err(StochError::BadPosition {
            position: k,
            len: f1.dom().len(),
        });
    }
    let split = f1.dom().len() - k;
    same_dims("almost-sure equality", &f1.dom()[split..], p.cod())?;
    let nx = size(p.cod());
    let nw = size(&f1.dom()[..split]);
    let supp = support(p, tol);
    for w in 0..nw {
        for &x in &supp {
            let row = w * nx + x;
            let differs = f1
                .row(row)
                .iter()
                .zip(f2.row(row))
                .any(|(a, b)| (a - b).abs() > tol.eq);
            if differs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Absolute continuity `p ≪ q`: the support of `p` is contained in the support of `q`.
pub fn abs_cont(p: &NonnegMatrix, q: &NonnegMatrix, tol: &Tolerances) -> Result<bool, StochError> {
    same_dims("absolute continuity", p.cod(), q.cod())?;
    let sq = support(q, tol);
    Ok(support(p, tol).iter().all(|x| sq.contains(x)))
}

/// `Δ ∘ p ≪ p ⊗ p`.
pub fn is_atomic(p: &Kernel, tol: &Tolerances) -> bool {
    let copied = p.then(&Kernel::copy(p.cod())).expect("copy matches codomain");
    let pp = p.tensor(p);
    abs_cont(&copied, &pp, tol).expect("same codomain")
}

/// Every entry is 0 or 1 within `tol.eq`.
pub fn is_deterministic(f: &Kernel, tol: &Tolerances) -> bool {
    f.data()
        .iter()
        .all(|&v| v.abs() <= tol.eq || (v - 1.0).abs() <= tol.eq)
}

/// `f|_X : X ⊗ A -> Y` for `f : A -> X ⊗ Y`, where `X` is the first `x_factors` outputs.
/// Null columns get the uniform distribution.
pub fn conditional(f: &Kernel, x_factors: usize, tol: &Tolerances) -> Result<Kernel, StochError> {
    if x_factors > f.cod().len() {
        return Err(StochError::BadPosition {
            position: x_factors,
            len: f.cod().len(),
        });
    }
    let xs: Vec<FinSet> = f.cod()[..x_factors].to_vec();
    let ys: Vec<FinSet> = f.cod()[x_factors..].to_vec();
    let (ny, na) = (size(&ys), f.rows());
    let mut dom = xs;
    dom.extend_from_slice(f.dom());
    let m = NonnegMatrix::from_fn(dom, ys, |row, y| {
        let (x, a) = (row / na, row % na);
        let denom: f64 = (0..ny).map(|y2| f.get(a, x * ny + y2)).sum();
        if denom > tol.null {
            f.get(a, x * ny + y) / denom
        } else {
            1.0 / ny as f64
        }
    })?;
    Kernel::from_matrix(m, tol)
}

/// Largest entrywise deviation between `f` and its recomposition from the `X` marginal and the
/// conditional `cond : X ⊗ A -> Y`, assembled with copy maps.
pub fn conditional_residual(
    f: &Kernel,
    x_factors: usize,
    cond: &Kernel,
) -> Result<f64, StochError> {
    let xs = &f.cod()[..x_factors];
    let a = f.dom();
    let marg = f.marginal(&(0..x_factors).collect::<Vec<_>>())?;
    let recomposed = Kernel::copy(a)
        .then(&marg.tensor(&Kernel::identity(a)))?
        .then(&Kernel::copy(xs).tensor(&Kernel::identity(a)))?
        .then(&Kernel::identity(xs).tensor(cond))?;
    recomposed.max_abs_diff(f)
}

/// Bayesian inverse `f†_p : A ⊗ Y -> X` of `f : X -> Y` with respect to `p : A -> X`: the
/// conditional of the joint `(id ⊗ f) ∘ Δ ∘ p` on `Y`.
pub fn bayes_inverse(f: &Kernel, p: &Kernel, tol: &Tolerances) -> Result<Kernel, StochError> {
    let xs = p.cod();
    let (kx, ky, ka) = (xs.len(), f.cod().len(), p.dom().len());
    let joint = p
        .then(&Kernel::copy(xs))?
        .then(&Kernel::identity(xs).tensor(f))?;
    let y_first: Vec<usize> = (kx..kx + ky).chain(0..kx).collect();
    let cond = conditional(&joint.permute_cod(&y_first)?, ky, tol)?;
    // cond : Y ⊗ A -> X, reorder to A ⊗ Y
    let a_first: Vec<usize> = (ky..ky + ka).chain(0..ky).collect();
    cond.permute_dom(&a_first)
}

/// Deviation between `(id ⊗ f) ∘ Δ ∘ p` and the same joint rebuilt from the predictive
/// `f ∘ p` and the inverse.
pub fn bayes_residual(f: &Kernel, p: &Kernel, inv: &Kernel) -> Result<f64, StochError> {
    let xs = p.cod();
    let ys = f.cod();
    let a = p.dom();
    let lhs = p
        .then(&Kernel::copy(xs))?
        .then(&Kernel::identity(xs).tensor(f))?;
    let predictive = p.then(f)?;
    let rhs = Kernel::copy(a)
        .then(&Kernel::identity(a).tensor(&predictive))?
        .then(&Kernel::identity(a).tensor(&Kernel::copy(ys)))?
        .then(&inv.tensor(&Kernel::identity(ys)))?;
    lhs.max_abs_diff(&rhs)
}

/// Index-level check of the copy equation `Δ ∘ f = (f ⊗ f) ∘ Δ`.
pub fn commutes_with_copy(f: &Kernel, tol: &Tolerances) -> bool {
    let lhs = f.then(&Kernel::copy(f.cod())).unwrap();
    let rhs = Kernel::copy(f.dom()).then(&f.tensor(f)).unwrap();
    lhs.max_abs_diff(&rhs).unwrap() <= tol.eq
}
