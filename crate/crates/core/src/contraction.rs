//! Structural non-signalling and hypergraph contraction: the causal trace of free Markov
//! categories.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::diagram::{Diagram, DiagramError};
use crate::hypergraph::{Cospan, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("feedback width {feedback} exceeds the boundary ({dom} inputs, {cod} outputs)")]
    FeedbackTooWide {
        feedback: usize,
        dom: usize,
        cod: usize,
    },
    #[error("feedback wires have different types on the two boundaries")]
    FeedbackTypeMismatch,
    #[error("diagram signals from a feedback input to a feedback output")]
    SignallingInput,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A diagram `m ⊗ w -> n ⊗ w` whose trailing `feedback` boundary wires on each side form `w`.
#[derive(Debug, Clone)]
pub struct TracePartition {
    diagram: Diagram,
    feedback: usize,
}

impl TracePartition {
    pub fn new(diagram: Diagram, feedback: usize) -> Result<TracePartition, ContractionError> {
        let (dom, cod) = (diagram.dom(), diagram.cod());
        if feedback > dom.len() || feedback > cod.len() {
            return Err(ContractionError::FeedbackTooWide {
                feedback,
                dom: dom.len(),
                cod: cod.len(),
            });
        }
        if dom[dom.len() - feedback..] != cod[cod.len() - feedback..] {
            return Err(ContractionError::FeedbackTypeMismatch);
        }
        Ok(TracePartition { diagram, feedback })
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn feedback(&self) -> usize {
        self.feedback
    }

    /// Inputs not in `w`.
    pub fn open_inputs(&self) -> usize {
        self.diagram.cospan().left.len() - self.feedback
    }

    /// Outputs not in `w`.
    pub fn open_outputs(&self) -> usize {
        self.diagram.cospan().right.len() - self.feedback
    }

    pub fn feedback_types(&self) -> Vec<TypeId> {
        let dom = self.diagram.dom();
        dom[dom.len() - self.feedback..].to_vec()
    }
}

/// Wires reachable from `start` along box input-to-output edges (including `start` itself).
pub fn reachable_wires(c: &Cospan, start: &[usize]) -> Vec<bool> {
    let g = &c.apex;
    let mut seen = vec![false; g.num_wires()];
    let mut stack: Vec<usize> = start.to_vec();
    while let Some(w) = stack.pop() {
        if seen[w] {
            continue;
        }
        seen[w] = true;
        for b in g.boxes() {
            if b.inputs.contains(&w) {
                stack.extend(b.outputs.iter().copied().filter(|&o| !seen[o]));
            }
        }
    }
    seen
}

/// True iff no path leads from a feedback input wire to a feedback output wire.
pub fn is_nonsignalling(t: &TracePartition) -> bool {
    let c = t.diagram.cospan();
    let reach = reachable_wires(c, &c.left[t.open_inputs()..]);
    c.right[t.open_outputs()..].iter().all(|&w| !reach[w])
}

/// Glues the `k`-th feedback input wire to the `k`-th feedback output wire for every `k`, drops
/// them from the boundary and normalises.
pub fn contract(t: &TracePartition) -> Result<Diagram, ContractionError> {
    if !is_nonsignalling(t) {
        return Err(ContractionError::SignallingInput);
    }
    let c = t.diagram.cospan();
    let (m, n) = (t.open_inputs(), t.open_outputs());
    let pairs: Vec<(usize, usize)> = c.left[m..]
        .iter()
        .copied()
        .zip(c.right[n..].iter().copied())
        .collect();
    let (apex, class) = c
        .apex
        .quotient_wires(&pairs)
        .map_err(DiagramError::from)?;
    let left = c.left[..m].iter().map(|&w| class[w]).collect();
    let right = c.right[..n].iter().map(|&w| class[w]).collect();
    let glued = Cospan::new(apex, left, right).map_err(DiagramError::from)?;
    // normalize re-validates the result
    Ok(Diagram::normalize(glued)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Term;
    use crate::hypergraph::Signature;
    use crate::random::DiagramGen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use alloc::sync::Arc;

    fn sig() -> Arc<Signature> {
        let mut s = Signature::new();
        s.add_type("X").unwrap();
        s.add_type("W").unwrap();
        s.add_type("Y").unwrap();
        s.add_box_named("s", &["X"], &["W"]).unwrap();
        s.add_box_named("q", &["W", "X"], &["Y"]).unwrap();
        s.add_box_named("f", &["X", "W"], &["Y", "W"]).unwrap();
        Arc::new(s)
    }

    fn build(sig: &Arc<Signature>, src: &str) -> Diagram {
        crate::diagram::build_from_term(sig, &parse_simple(src)).unwrap()
    }

    /// Minimal term reader for tests: `a ; b` and `a * b` with single-token atoms.
    fn parse_simple(src: &str) -> Term {
        let seqs: Vec<&str> = src.split(';').collect();
        let terms = seqs.iter().map(|s| {
            Term::par_all(s.split('*').map(|atom| {
                let atom = atom.trim();
                if let Some(rest) = atom.strip_prefix("id_") {
                    Term::id(rest.split('_'))
                } else if let Some(rest) = atom.strip_prefix("copy_") {
                    Term::new(crate::diagram::TermKind::Copy(rest.into()))
                } else if let Some(rest) = atom.strip_prefix("swap_") {
                    let (a, b) = rest.split_once('_').unwrap();
                    Term::new(crate::diagram::TermKind::Swap(a.into(), b.into()))
                } else {
                    Term::boxed(atom)
                }
            }))
        });
        Term::seq_all(terms).unwrap()
    }

    #[test]
    fn identity_on_w_signals() {
        let s = sig();
        let t = TracePartition::new(build(&s, "id_W"), 1).unwrap();
        assert!(!is_nonsignalling(&t));
        assert_eq!(contract(&t).err(), Some(ContractionError::SignallingInput));
    }

    #[test]
    fn swap_is_traceable_and_yanks() {
        let s = sig();
        let sw = build(&s, "swap_W_W");
        let t = TracePartition::new(sw, 1).unwrap();
        assert!(is_nonsignalling(&t));
        let id = build(&s, "id_W");
        assert_eq!(contract(&t).unwrap(), id);
    }

    #[test]
    fn vanishing_over_empty_feedback() {
        let s = sig();
        let d = build(&s, "copy_X ; s * id_X ; q");
        let t = TracePartition::new(d.clone(), 0).unwrap();
        assert!(is_nonsignalling(&t));
        assert_eq!(contract(&t).unwrap(), d);
    }

    #[test]
    fn feedback_width_and_types_are_checked() {
        let s = sig();
        let d = build(&s, "s");
        assert!(matches!(
            TracePartition::new(d.clone(), 2),
            Err(ContractionError::FeedbackTooWide { .. })
        ));
        assert_eq!(
            TracePartition::new(d, 1).err(),
            Some(ContractionError::FeedbackTypeMismatch)
        );
    }

    #[test]
    fn contraction_example_yields_inner_wire() {
        // X ⊗ W -> Y ⊗ W: w_out = s(x), y = q(w_in, x)
        let s = sig();
        let d = build(&s, "copy_X * id_W ; s * id_X * id_W ; id_W * swap_X_W ; id_W * q ; swap_W_Y");
        let t = TracePartition::new(d, 1).unwrap();
        assert!(is_nonsignalling(&t));
        let contracted = contract(&t).unwrap();
        let expected = build(&s, "copy_X ; s * id_X ; q");
        assert_eq!(contracted.num_boxes(), 2);
        assert_eq!(contracted, expected);
        // the glued wire is inner: neither on the boundary
        let c = contracted.cospan();
        let inner = (0..c.apex.num_wires())
            .filter(|w| !c.left.contains(w) && !c.right.contains(w))
            .count();
        assert_eq!(inner, 1);
    }

    #[test]
    fn signalling_box_is_rejected() {
        let s = sig();
        let t = TracePartition::new(build(&s, "f"), 1).unwrap();
        assert!(!is_nonsignalling(&t));
    }

    /// Exhaustive path enumeration, independent of the reachability search.
    fn paths_exist(c: &Cospan, from: usize, to: usize, depth: usize) -> bool {
        if from == to {
            return true;
        }
        if depth == 0 {
            return false;
        }
        c.apex.boxes().iter().any(|b| {
            b.inputs.contains(&from) && b.outputs.iter().any(|&o| paths_exist(c, o, to, depth - 1))
        })
    }

    #[test]
    fn structural_check_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gen = DiagramGen::standard();
        for _ in 0..300 {
            let d = gen.diagram(&mut rng);
            let c = d.cospan();
            let w = rng.gen_range(0..=c.left.len().min(c.right.len()));
            let (dom, cod) = (d.dom(), d.cod());
            if dom[dom.len() - w..] != cod[cod.len() - w..] {
                continue;
            }
            let t = TracePartition::new(d.clone(), w).unwrap();
            let nb = c.apex.num_boxes();
            let brute = c.left[c.left.len() - w..].iter().all(|&i| {
                c.right[c.right.len() - w..]
                    .iter()
                    .all(|&o| !paths_exist(c, i, o, nb))
            });
            assert_eq!(is_nonsignalling(&t), brute);
        }
    }
}
