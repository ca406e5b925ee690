//! Non-signalling kernels, disintegrations and the causal trace.
//!
//! A kernel `f : X ⊗ W' -> Y ⊗ W` is non-signalling when its `W` marginal does not depend on
//! `W'`. It then factors as `f(y, w | x, w') = f_s(w | x) · f_p(y | w, x, w')`, and for `W' = W`
//! the causal trace feeds the sampled `w` back in:
//! `tr(y | x) = Σ_w f_s(w | x) · f_p(y | w, x, w)`. On non-signalling kernels this coincides with
//! the diagonal sum `Σ_w f(y, w | x, w)` of Mat(ℝ⁺), which [`mat_trace`] computes for arbitrary
//! nonnegative matrices.

use alloc::vec::Vec;

use super::{same_dims, size, FinSet, Kernel, NonnegMatrix, StochError, Tolerances};

fn split_check(len: usize, k: usize) -> Result<usize, StochError> {
    if k > len {
        Err(StochError::BadPosition { position: k, len })
    } else {
        Ok(len - k)
    }
}

/// Checks that `f : X ⊗ W' -> Y ⊗ W` (with `W'` the trailing `w_in` inputs and `W` the trailing
/// `w_out` outputs) is non-signalling from `W'` to `W`. Returns `f_s : X -> W`, the mean of the
/// `W` marginals over `w'`, when all of them agree within `tol.ns`.
pub fn is_nonsignalling_sem(
    f: &Kernel,
    w_in: usize,
    w_out: usize,
    tol: &Tolerances,
) -> Result<Option<Kernel>, StochError> {
    let sx = split_check(f.dom().len(), w_in)?;
    let sy = split_check(f.cod().len(), w_out)?;
    let xs = &f.dom()[..sx];
    let nwp = size(&f.dom()[sx..]);
    let marg = f.marginal(&(sy..f.cod().len()).collect::<Vec<_>>())?;
    let nw = marg.cols();
    let mut data = Vec::with_capacity(size(xs) * nw);
    for x in 0..size(xs) {
        let first = marg.row(x * nwp);
        for wp in 1..nwp {
            let other = marg.row(x * nwp + wp);
            if first.iter().zip(other).any(|(a, b)| (a - b).abs() > tol.ns) {
                return Ok(None);
            }
        }
        for w in 0..nw {
            let mean = (0..nwp).map(|wp| marg.get(x * nwp + wp, w)).sum::<f64>() / nwp as f64;
            data.push(mean);
        }
    }
    let m = NonnegMatrix::new(xs.to_vec(), marg.cod().to_vec(), data)?;
    Ok(Some(Kernel::from_matrix(m, tol)?))
}

/// A factorisation of a non-signalling `f : X ⊗ W' -> Y ⊗ W` into `f_s : X -> W` and
/// `f_p : W ⊗ X ⊗ W' -> Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Disintegration {
    pub f_s: Kernel,
    pub f_p: Kernel,
    /// Number of `W'` factors (trailing inputs of `f`).
    pub w_in: usize,
}

impl Disintegration {
    fn x_factors(&self) -> &[FinSet] {
        self.f_s.dom()
    }

    fn w_factors(&self) -> &[FinSet] {
        self.f_s.cod()
    }

    fn wp_factors(&self) -> &[FinSet] {
        let d = self.f_p.dom();
        &d[d.len() - self.w_in..]
    }

    /// Rebuilds `f : X ⊗ W' -> Y ⊗ W` from the two pieces with copy and swap maps.
    pub fn recompose(&self) -> Result<Kernel, StochError> {
        let (xs, ws, wps) = (self.x_factors(), self.w_factors(), self.wp_factors());
        let ys = self.f_p.cod();
        let id_wp = Kernel::identity(wps);
        let id_x = Kernel::identity(xs);
        Kernel::copy(xs)
            .tensor(&id_wp)
            .then(&self.f_s.tensor(&id_x).tensor(&id_wp))?
            .then(&Kernel::copy(ws).tensor(&id_x).tensor(&id_wp))?
            .then(&Kernel::identity(ws).tensor(&self.f_p))?
            .then(&Kernel::swap(ws, ys))
    }

    /// The causal trace `X -> Y`: copy `x`, draw `w ~ f_s(x)` and feed `(w, x, w)` to `f_p`.
    /// Requires `W' = W`.
    pub fn trace(&self) -> Result<Kernel, StochError> {
        let (xs, ws) = (self.x_factors(), self.w_factors());
        same_dims("causal trace", ws, self.wp_factors())?;
        let (kx, kw) = (xs.len(), ws.len());
        let fed = Kernel::copy(xs)
            .then(&self.f_s.tensor(&Kernel::identity(xs)))?
            .then(&Kernel::copy(ws).tensor(&Kernel::identity(xs)))?;
        // W ⊗ W ⊗ X  ->  W ⊗ X ⊗ W
        let perm: Vec<usize> = (0..kw).chain(2 * kw..2 * kw + kx).chain(kw..2 * kw).collect();
        let fed = fed.permute_cod(&perm)?.retype(xs.to_vec(), self.f_p.dom().to_vec())?;
        fed.then(&self.f_p)
    }
}

/// Disintegrates `f` given its `f_s`. `f_p(y | w, x, w')` is `f(y, w | x, w')` normalised over
/// `y`; cells where that mass is at most `tol.null` get the uniform distribution.
pub fn disintegrate(
    f: &Kernel,
    f_s: &Kernel,
    w_in: usize,
    tol: &Tolerances,
) -> Result<Disintegration, StochError> {
    let w_out = f_s.cod().len();
    let sx = split_check(f.dom().len(), w_in)?;
    let sy = split_check(f.cod().len(), w_out)?;
    let (xs, wps) = (&f.dom()[..sx], &f.dom()[sx..]);
    let (ys, ws) = (&f.cod()[..sy], &f.cod()[sy..]);
    same_dims("disintegration", f_s.dom(), xs)?;
    same_dims("disintegration", f_s.cod(), ws)?;
    let (nx, nwp, ny, nw) = (size(xs), size(wps), size(ys), size(ws));
    let mut dom = ws.to_vec();
    dom.extend_from_slice(xs);
    dom.extend_from_slice(wps);
    let m = NonnegMatrix::from_fn(dom, ys.to_vec(), |row, y| {
        let wp = row % nwp;
        let x = (row / nwp) % nx;
        let w = row / (nwp * nx);
        let frow = f.row(x * nwp + wp);
        let mass: f64 = (0..ny).map(|y2| frow[y2 * nw + w]).sum();
        if mass > tol.null {
            frow[y * nw + w] / mass
        } else {
            1.0 / ny as f64
        }
    })?;
    Ok(Disintegration {
        f_s: f_s.clone(),
        f_p: Kernel::from_matrix(m, tol)?,
        w_in,
    })
}

/// The diagonal-sum trace `Σ_w f(y, w | x, w)` over the trailing `w` factors.
pub fn mat_trace(f: &NonnegMatrix, w: usize) -> Result<NonnegMatrix, StochError> {
    let sx = split_check(f.dom().len(), w)?;
    let sy = split_check(f.cod().len(), w)?;
    let (xs, wd) = (&f.dom()[..sx], &f.dom()[sx..]);
    let (ys, wc) = (&f.cod()[..sy], &f.cod()[sy..]);
    same_dims("trace", wd, wc)?;
    let nw = size(wd);
    NonnegMatrix::from_fn(xs.to_vec(), ys.to_vec(), |x, y| {
        (0..nw).map(|k| f.get(x * nw + k, y * nw + k)).sum()
    })
}

/// Causal trace of `f : X ⊗ W -> Y ⊗ W` over its trailing `w` factors. Computed through a
/// disintegration and checked against the diagonal sum within `tol.eq`.
pub fn causal_trace(f: &Kernel, w: usize, tol: &Tolerances) -> Result<Kernel, StochError> {
    let f_s = is_nonsignalling_sem(f, w, w, tol)?.ok_or(StochError::SignallingInput)?;
    let d = disintegrate(f, &f_s, w, tol)?;
    let traced = d.trace()?;
    let diagonal = mat_trace(f, w)?;
    let residual = traced.max_abs_diff(&diagonal)?;
    if residual > tol.eq {
        return Err(StochError::TraceMismatch { residual });
    }
    Ok(traced)
}
