//! String diagrams for free Markov categories and their finite stochastic semantics.
//!
//! Diagrams are cospans of labelled hypergraphs ([`hypergraph`], [`diagram`]). Composition is
//! pushout followed by normalisation, tensor is coproduct, and equality is decided by a canonical
//! form. Non-signalling diagrams can be contracted along feedback wires ([`contraction`]).
//!
//! The semantic side ([`stoch`]) works with row-stochastic matrices over finite sets: conditionals,
//! Bayesian inverses, disintegrations and the causal trace of non-signalling kernels, with the
//! diagonal-sum trace on nonnegative matrices as an independent oracle. [`combs`] builds the comb
//! calculus on top, and [`interp`] evaluates diagrams under a model by tensor contraction.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod combs;
pub mod contraction;
pub mod diagram;
pub mod hypergraph;
pub mod interp;
pub mod laws;
pub mod random;
pub mod stoch;

pub use combs::{Comb, CombError};
pub use contraction::{ContractionError, TracePartition};
pub use diagram::{Diagram, DiagramError, Term, TermKind};
pub use hypergraph::{Cospan, Hypergraph, HypergraphError, Signature};
pub use interp::{Model, ModelError};
pub use stoch::{FinSet, Kernel, NonnegMatrix, StochError, Tolerances};
