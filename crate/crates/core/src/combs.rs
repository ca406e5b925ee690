//! Two-tooth combs `(E, f : A -> E ⊗ B, g : E ⊗ B' -> A')`, insertion into the hole, and the
//! equivalences between combs.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::random;
use crate::stoch::{
    disintegrate, is_nonsignalling_sem, size, FinSet, Kernel, StochError, Tolerances,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombError {
    #[error(transparent)]
    Stoch(#[from] StochError),
    #[error("comb teeth do not match the environment")]
    EnvironmentMismatch,
    #[error("boundary types differ")]
    BoundaryMismatch,
    #[error("kernel signals from the hole output to the hole input")]
    SignallingInput,
    #[error("extensionally equal combs disagree on context {context} by {residual}")]
    AuditFailure { context: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comb {
    env: Vec<FinSet>,
    f: Kernel,
    g: Kernel,
    b_len: usize,
}

fn cards(fs: &[FinSet]) -> Vec<usize> {
    fs.iter().map(FinSet::card).collect()
}

impl Comb {
    /// `f : A -> E ⊗ B` with `B` its last `b_len` outputs, and `g : E ⊗ B' -> A'`.
    pub fn new(env: Vec<FinSet>, f: Kernel, g: Kernel, b_len: usize) -> Result<Comb, CombError> {
        let k = env.len();
        if f.cod().len() != k + b_len || g.dom().len() < k {
            return Err(CombError::EnvironmentMismatch);
        }
        if cards(&f.cod()[..k]) != cards(&env) || cards(&g.dom()[..k]) != cards(&env) {
            return Err(CombError::EnvironmentMismatch);
        }
        Ok(Comb { env, f, g, b_len })
    }

    pub fn env(&self) -> &[FinSet] {
        &self.env
    }

    pub fn first(&self) -> &Kernel {
        &self.f
    }

    pub fn second(&self) -> &Kernel {
        &self.g
    }

    pub fn a(&self) -> &[FinSet] {
        self.f.dom()
    }

    pub fn a_out(&self) -> &[FinSet] {
        self.g.cod()
    }

    /// What the comb sends into the hole.
    pub fn b(&self) -> &[FinSet] {
        &self.f.cod()[self.env.len()..]
    }

    /// What the comb receives from the hole.
    pub fn b_out(&self) -> &[FinSet] {
        &self.g.dom()[self.env.len()..]
    }

    fn same_boundary(&self, other: &Comb) -> bool {
        cards(self.a()) == cards(other.a())
            && cards(self.a_out()) == cards(other.a_out())
            && cards(self.b()) == cards(other.b())
            && cards(self.b_out()) == cards(other.b_out())
    }

    /// `C[h] = (f ⊗ id_K) ; (id_E ⊗ h) ; (g ⊗ id_K')` for `h : B ⊗ K -> B' ⊗ K'`.
    pub fn insert(&self, h: &Kernel) -> Result<Kernel, CombError> {
        let (nb, nb2) = (self.b().len(), self.b_out().len());
        if h.dom().len() < nb
            || h.cod().len() < nb2
            || cards(&h.dom()[..nb]) != cards(self.b())
            || cards(&h.cod()[..nb2]) != cards(self.b_out())
        {
            return Err(CombError::BoundaryMismatch);
        }
        let k = &h.dom()[nb..];
        let k_out = &h.cod()[nb2..];
        Ok(self
            .f
            .tensor(&Kernel::identity(k))
            .then(&Kernel::identity(&self.env).tensor(h))?
            .then(&self.g.tensor(&Kernel::identity(k_out)))?)
    }

    /// `C[swap_{B,B'}] : A ⊗ B' -> A' ⊗ B`.
    pub fn extension(&self) -> Result<Kernel, CombError> {
        self.insert(&Kernel::swap(self.b(), self.b_out()))
    }

    /// The comb with environment `A ⊗ B` built from a disintegration of a kernel
    /// `f : A ⊗ B' -> A' ⊗ B` that is non-signalling from `B'` (the last `b_out_len` inputs) to
    /// `B` (the last `b_len` outputs). Its extension is `f`.
    pub fn from_nonsignalling(
        f: &Kernel,
        b_out_len: usize,
        b_len: usize,
        tol: &Tolerances,
    ) -> Result<Comb, CombError> {
        let f_s = is_nonsignalling_sem(f, b_out_len, b_len, tol)?.ok_or(CombError::SignallingInput)?;
        let d = disintegrate(f, &f_s, b_out_len, tol)?;
        let a = f_s.dom().to_vec();
        let b = f_s.cod().to_vec();
        let (ka, kb) = (a.len(), b.len());
        // A -> A ⊗ B -> A ⊗ B ⊗ B
        let first = Kernel::copy(&a)
            .then(&Kernel::identity(&a).tensor(&f_s))?
            .then(&Kernel::identity(&a).tensor(&Kernel::copy(&b)))?;
        // f_p : B ⊗ A ⊗ B' -> A', reordered to take A ⊗ B ⊗ B'
        let perm: Vec<usize> = (kb..kb + ka)
            .chain(0..kb)
            .chain(ka + kb..d.f_p.dom().len())
            .collect();
        let second = d.f_p.permute_dom(&perm)?;
        let mut env = a;
        env.extend(b);
        Comb::new(env, first, second, kb)
    }
}

/// Extensions agree within `tol.eq`.
pub fn ext_equiv(c1: &Comb, c2: &Comb, tol: &Tolerances) -> Result<bool, CombError> {
    if !c1.same_boundary(c2) {
        return Err(CombError::BoundaryMismatch);
    }
    let (e1, e2) = (c1.extension()?, c2.extension()?);
    Ok(e1.max_abs_diff(&e2)? <= tol.eq)
}

/// Contextual equivalence, decided through extensional equivalence. When the combs are
/// extensionally equal, `budget` random contexts `h : B ⊗ K -> B' ⊗ K'` are inserted into both
/// and the results compared; any disagreement is reported as [`CombError::AuditFailure`].
pub fn ctx_equiv<R: Rng + ?Sized>(
    c1: &Comb,
    c2: &Comb,
    budget: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<bool, CombError> {
    if !ext_equiv(c1, c2, tol)? {
        return Ok(false);
    }
    for context in 0..budget {
        let h = random_context(rng, c1.b(), c1.b_out(), 3);
        let (i1, i2) = (c1.insert(&h)?, c2.insert(&h)?);
        let residual = i1.max_abs_diff(&i2)?;
        if residual > tol.eq {
            return Err(CombError::AuditFailure { context, residual });
        }
    }
    Ok(true)
}

/// A random `h : B ⊗ K -> B' ⊗ K'` with `K, K'` of at most one factor each.
pub fn random_context<R: Rng + ?Sized>(rng: &mut R, b: &[FinSet], b_out: &[FinSet], max_card: usize) -> Kernel {
    let mut dom = b.to_vec();
    dom.extend(random::object(rng, 1, max_card, "K"));
    let mut cod = b_out.to_vec();
    cod.extend(random::object(rng, 1, max_card, "L"));
    let zero_prob = if size(&cod) > 1 { 0.3 } else { 0.0 };
    random::kernel(rng, &dom, &cod, zero_prob)
}

/// Optic equivalence. In finite stochastic kernels it coincides with extensional equivalence,
/// which is what is computed.
pub fn optic_equiv(c1: &Comb, c2: &Comb, tol: &Tolerances) -> Result<bool, CombError> {
    ext_equiv(c1, c2, tol)
}
