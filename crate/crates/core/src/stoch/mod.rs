//! Finite stochastic kernels and nonnegative matrices.
//!
//! A [`Kernel`] `X1 ⊗ .. ⊗ Xm -> Y1 ⊗ .. ⊗ Yn` is a dense row-stochastic matrix. Rows are indexed
//! by input tuples and columns by output tuples, both flattened lexicographically with the
//! leftmost factor most significant: the tuple `(x1, .., xm)` sits at
//! `((x1 * |X2| + x2) * |X3| + x3) ...`. An empty factor list has exactly one index. This makes
//! the tensor product the Kronecker product.
//!
//! Dimension checks compare cardinalities; set names are carried along for display and
//! serialisation only.

mod cond;
mod trace;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use thiserror::Error;

pub use cond::{
    abs_cont, as_equal, bayes_inverse, bayes_residual, commutes_with_copy, conditional, conditional_residual, is_atomic,
    is_deterministic, support,
};
pub use trace::{
    causal_trace, disintegrate, is_nonsignalling_sem, mat_trace, Disintegration,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochError {
    #[error("finite set `{0}` must be nonempty")]
    EmptySet(String),
    #[error("expected {expected} entries, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("dimension mismatch in {context}: {left:?} vs {right:?}")]
    DimensionMismatch {
        context: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("factor position {position} out of range for {len} factors")]
    BadPosition { position: usize, len: usize },
    #[error("kernel signals from the feedback input to the feedback output")]
    SignallingInput,
    #[error("causal trace and diagonal-sum trace disagree by {residual}")]
    TraceMismatch { residual: f64 },
}

/// Numerical tolerances used across the backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Row sums of kernels.
    pub row: f64,
    /// Entrywise equality of kernels.
    pub eq: f64,
    /// Agreement of marginal slices in the non-signalling check.
    pub ns: f64,
    /// Entries above this count as support.
    pub supp: f64,
    /// Denominators at or below this are treated as null.
    pub null: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        row: 1e-9,
        eq: 1e-9,
        ns: 1e-9,
        supp: 1e-12,
        null: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A named nonempty finite set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinSet {
    name: String,
    card: usize,
}

impl FinSet {
    pub fn new(name: &str, card: usize) -> Result<FinSet, StochError> {
        if card == 0 {
            return Err(StochError::EmptySet(name.into()));
        }
        Ok(FinSet {
            name: name.into(),
            card,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn card(&self) -> usize {
        self.card
    }
}

/// Number of tuples over a factor list.
pub fn size(sets: &[FinSet]) -> usize {
    sets.iter().map(FinSet::card).product()
}

fn cards(sets: &[FinSet]) -> Vec<usize> {
    sets.iter().map(FinSet::card).collect()
}

/// Splits a flat index into per-factor digits.
pub fn decode(mut index: usize, sets: &[FinSet]) -> Vec<usize> {
    let mut digits = vec![0; sets.len()];
    for (d, s) in digits.iter_mut().zip(sets).rev() {
        *d = index % s.card;
        index /= s.card;
    }
    digits
}

/// Inverse of [`decode`].
pub fn encode(digits: &[usize], sets: &[FinSet]) -> usize {
    digits
        .iter()
        .zip(sets)
        .fold(0, |acc, (&d, s)| acc * s.card + d)
}

pub(crate) fn same_dims(context: &'static str, a: &[FinSet], b: &[FinSet]) -> Result<(), StochError> {
    if cards(a) == cards(b) {
        Ok(())
    } else {
        Err(StochError::DimensionMismatch {
            context,
            left: cards(a),
            right: cards(b),
        })
    }
}

fn concat(a: &[FinSet], b: &[FinSet]) -> Vec<FinSet> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// A dense matrix with nonnegative entries between factor lists: a morphism of Mat(ℝ⁺).
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    dom: Vec<FinSet>,
    cod: Vec<FinSet>,
    data: Vec<f64>,
}

impl NonnegMatrix {
    pub fn new(dom: Vec<FinSet>, cod: Vec<FinSet>, data: Vec<f64>) -> Result<Self, StochError> {
        let (rows, cols) = (size(&dom), size(&cod));
        if data.len() != rows * cols {
            return Err(StochError::BadLength {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(StochError::BadEntry {
                row: i / cols,
                col: i % cols,
                value: data[i],
            });
        }
        Ok(NonnegMatrix { dom, cod, data })
    }

    /// Builds a matrix from an entry function `(row, col) -> value`.
    pub fn from_fn(
        dom: Vec<FinSet>,
        cod: Vec<FinSet>,
        mut entry: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, StochError> {
        let (rows, cols) = (size(&dom), size(&cod));
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(entry(r, c));
            }
        }
        Self::new(dom, cod, data)
    }

    pub fn dom(&self) -> &[FinSet] {
        &self.dom
    }

    pub fn cod(&self) -> &[FinSet] {
        &self.cod
    }

    pub fn rows(&self) -> usize {
        size(&self.dom)
    }

    pub fn cols(&self) -> usize {
        size(&self.cod)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.data[row * c..(row + 1) * c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows()).map(|r| self.row(r).iter().sum()).collect()
    }

    /// Sequential composite `self ; next` (matrix product).
    pub fn then(&self, next: &NonnegMatrix) -> Result<NonnegMatrix, StochError> {
        same_dims("composition", &self.cod, &next.dom)?;
        let (n, k, m) = (self.rows(), self.cols(), next.cols());
        let mut data = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..k {
                let a = self.data[i * k + j];
                if a == 0.0 {
                    continue;
                }
                for (out, &b) in data[i * m..(i + 1) * m].iter_mut().zip(next.row(j)) {
                    *out += a * b;
                }
            }
        }
        Ok(NonnegMatrix {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            data,
        })
    }

    /// Kronecker product.
    pub fn tensor(&self, other: &NonnegMatrix) -> NonnegMatrix {
        let (r1, c1, r2, c2) = (self.rows(), self.cols(), other.rows(), other.cols());
        let mut data = vec![0.0; r1 * r2 * c1 * c2];
        let cols = c1 * c2;
        for i1 in 0..r1 {
            for i2 in 0..r2 {
                let row = i1 * r2 + i2;
                for j1 in 0..c1 {
                    let a = self.data[i1 * c1 + j1];
                    for j2 in 0..c2 {
                        data[row * cols + j1 * c2 + j2] = a * other.data[i2 * c2 + j2];
                    }
                }
            }
        }
        NonnegMatrix {
            dom: concat(&self.dom, &other.dom),
            cod: concat(&self.cod, &other.cod),
            data,
        }
    }

    /// Sums out the output factors not listed in `kept`; the listed factors appear in the given
    /// order (so a permutation of all positions reorders the outputs).
    pub fn marginal(&self, kept: &[usize]) -> Result<NonnegMatrix, StochError> {
        if let Some(&p) = kept.iter().find(|&&p| p >= self.cod.len()) {
            return Err(StochError::BadPosition {
                position: p,
                len: self.cod.len(),
            });
        }
        let new_cod: Vec<FinSet> = kept.iter().map(|&p| self.cod[p].clone()).collect();
        let new_cols = size(&new_cod);
        let cols = self.cols();
        let target: Vec<usize> = (0..cols)
            .map(|c| {
                let digits = decode(c, &self.cod);
                let kept_digits: Vec<usize> = kept.iter().map(|&p| digits[p]).collect();
                encode(&kept_digits, &new_cod)
            })
            .collect();
        let mut data = vec![0.0; self.rows() * new_cols];
        for r in 0..self.rows() {
            for (c, &t) in target.iter().enumerate() {
                data[r * new_cols + t] += self.data[r * cols + c];
            }
        }
        Ok(NonnegMatrix {
            dom: self.dom.clone(),
            cod: new_cod,
            data,
        })
    }

    /// Reorders the input factors: the new `i`-th input is the old input `perm[i]`.
    pub fn permute_dom(&self, perm: &[usize]) -> Result<NonnegMatrix, StochError> {
        check_perm(perm, self.dom.len())?;
        let new_dom: Vec<FinSet> = perm.iter().map(|&p| self.dom[p].clone()).collect();
        let cols = self.cols();
        let mut data = vec![0.0; self.data.len()];
        for new_row in 0..self.rows() {
            let nd = decode(new_row, &new_dom);
            let mut od = vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                od[p] = nd[i];
            }
            let old_row = encode(&od, &self.dom);
            data[new_row * cols..(new_row + 1) * cols].copy_from_slice(self.row(old_row));
        }
        Ok(NonnegMatrix {
            dom: new_dom,
            cod: self.cod.clone(),
            data,
        })
    }

    /// Reorders the output factors: the new `i`-th output is the old output `perm[i]`.
    pub fn permute_cod(&self, perm: &[usize]) -> Result<NonnegMatrix, StochError> {
        check_perm(perm, self.cod.len())?;
        self.marginal(perm)
    }

    pub fn max_abs_diff(&self, other: &NonnegMatrix) -> Result<f64, StochError> {
        same_dims("comparison", &self.dom, &other.dom)?;
        same_dims("comparison", &self.cod, &other.cod)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Relabels the factor lists without touching the entries (cardinalities must match).
    pub fn retype(&self, dom: Vec<FinSet>, cod: Vec<FinSet>) -> Result<NonnegMatrix, StochError> {
        same_dims("retype", &self.dom, &dom)?;
        same_dims("retype", &self.cod, &cod)?;
        Ok(NonnegMatrix {
            dom,
            cod,
            data: self.data.clone(),
        })
    }
}

fn check_perm(perm: &[usize], len: usize) -> Result<(), StochError> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(StochError::BadPosition {
            position: perm.len(),
            len,
        });
    }
    for &p in perm {
        if p >= len || seen[p] {
            return Err(StochError::BadPosition { position: p, len });
        }
        seen[p] = true;
    }
    Ok(())
}

/// A row-stochastic matrix: a morphism of FinStoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel(NonnegMatrix);

impl Deref for Kernel {
    type Target = NonnegMatrix;

    fn deref(&self) -> &NonnegMatrix {
        &self.0
    }
}

impl Kernel {
    pub fn new(dom: Vec<FinSet>, cod: Vec<FinSet>, data: Vec<f64>) -> Result<Kernel, StochError> {
        Self::from_matrix(NonnegMatrix::new(dom, cod, data)?, &Tolerances::DEFAULT)
    }

    pub fn from_fn(
        dom: Vec<FinSet>,
        cod: Vec<FinSet>,
        entry: impl FnMut(usize, usize) -> f64,
    ) -> Result<Kernel, StochError> {
        Self::from_matrix(NonnegMatrix::from_fn(dom, cod, entry)?, &Tolerances::DEFAULT)
    }

    /// Accepts a matrix whose rows sum to one within `tol.row`.
    pub fn from_matrix(m: NonnegMatrix, tol: &Tolerances) -> Result<Kernel, StochError> {
        for (row, sum) in m.row_sums().into_iter().enumerate() {
            if (sum - 1.0).abs() > tol.row {
                return Err(StochError::NotStochastic { row, sum });
            }
        }
        Ok(Kernel(m))
    }

    pub fn matrix(&self) -> &NonnegMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> NonnegMatrix {
        self.0
    }

    pub fn identity(objs: &[FinSet]) -> Kernel {
        let n = size(objs);
        Kernel(NonnegMatrix {
            dom: objs.to_vec(),
            cod: objs.to_vec(),
            data: (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect(),
        })
    }

    /// `a ⊗ b -> b ⊗ a`.
    pub fn swap(a: &[FinSet], b: &[FinSet]) -> Kernel {
        let id = Kernel::identity(&concat(a, b));
        let perm: Vec<usize> = (a.len()..a.len() + b.len()).chain(0..a.len()).collect();
        Kernel(id.0.permute_cod(&perm).expect("valid permutation"))
    }

    /// The diagonal `x -> (x, x)` on a whole factor list.
    pub fn copy(objs: &[FinSet]) -> Kernel {
        let n = size(objs);
        let mut data = vec![0.0; n * n * n];
        for x in 0..n {
            data[x * n * n + x * n + x] = 1.0;
        }
        Kernel(NonnegMatrix {
            dom: objs.to_vec(),
            cod: concat(objs, objs),
            data,
        })
    }

    /// The unique kernel into the unit: a single all-ones column.
    pub fn del(objs: &[FinSet]) -> Kernel {
        Kernel(NonnegMatrix {
            dom: objs.to_vec(),
            cod: Vec::new(),
            data: vec![1.0; size(objs)],
        })
    }

    /// The uniform state on a factor list.
    pub fn uniform(objs: &[FinSet]) -> Kernel {
        let n = size(objs);
        Kernel(NonnegMatrix {
            dom: Vec::new(),
            cod: objs.to_vec(),
            data: vec![1.0 / n as f64; n],
        })
    }

    /// A point mass on the given output index.
    pub fn point(objs: &[FinSet], at: usize) -> Kernel {
        let n = size(objs);
        Kernel(NonnegMatrix {
            dom: Vec::new(),
            cod: objs.to_vec(),
            data: (0..n).map(|i| if i == at { 1.0 } else { 0.0 }).collect(),
        })
    }

    pub fn then(&self, next: &Kernel) -> Result<Kernel, StochError> {
        Ok(Kernel(self.0.then(&next.0)?))
    }

    pub fn tensor(&self, other: &Kernel) -> Kernel {
        Kernel(self.0.tensor(&other.0))
    }

    pub fn marginal(&self, kept: &[usize]) -> Result<Kernel, StochError> {
        Ok(Kernel(self.0.marginal(kept)?))
    }

    pub fn permute_dom(&self, perm: &[usize]) -> Result<Kernel, StochError> {
        Ok(Kernel(self.0.permute_dom(perm)?))
    }

    pub fn permute_cod(&self, perm: &[usize]) -> Result<Kernel, StochError> {
        Ok(Kernel(self.0.permute_cod(perm)?))
    }

    pub fn retype(&self, dom: Vec<FinSet>, cod: Vec<FinSet>) -> Result<Kernel, StochError> {
        Ok(Kernel(self.0.retype(dom, cod)?))
    }
}

/// `g ∘ f`, i.e. first `f` then `g`.
pub fn compose(g: &Kernel, f: &Kernel) -> Result<Kernel, StochError> {
    f.then(g)
}

pub fn tensor(f: &Kernel, g: &Kernel) -> Kernel {
    f.tensor(g)
}
