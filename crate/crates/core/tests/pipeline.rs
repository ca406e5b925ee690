//! End-to-end use of the public API: build diagrams, contract them, evaluate them.

use std::sync::Arc;

use markov_trace::contraction::{contract, is_nonsignalling};
use markov_trace::diagram::build_from_term;
use markov_trace::interp::{check_contraction_identity, check_trace_soundness, interpret, IdentityVerdict};
use markov_trace::laws::{identity_shape, identity_signature};
use markov_trace::stoch::causal_trace;
use markov_trace::{Diagram, FinSet, Kernel, Model, Signature, Term, TermKind, Tolerances, TracePartition};

const TOL: Tolerances = Tolerances::DEFAULT;

fn fs(n: &str, c: usize) -> FinSet {
    FinSet::new(n, c).unwrap()
}

fn t(kind: TermKind) -> Term {
    Term::new(kind)
}

fn id(ty: &str) -> Term {
    Term::id([ty])
}

/// X, W -> Y, W: copy the input, send one copy through `s` to the feedback output and feed the
/// returning W together with the other copy into `q`.
fn fanout() -> (Arc<Signature>, Diagram, Diagram) {
    let mut s = Signature::new();
    for ty in ["X", "W", "Y"] {
        s.add_type(ty).unwrap();
    }
    s.add_box_named("s", &["X"], &["W"]).unwrap();
    s.add_box_named("q", &["W", "X"], &["Y"]).unwrap();
    let sig = Arc::new(s);
    let lp = Term::seq_all([
        Term::par(t(TermKind::Copy("X".into())), id("W")),
        Term::par_all([Term::boxed("s"), id("X"), id("W")]),
        Term::par(id("W"), t(TermKind::Swap("X".into(), "W".into()))),
        Term::par(id("W"), Term::boxed("q")),
        t(TermKind::Swap("W".into(), "Y".into())),
    ])
    .unwrap();
    let expected = Term::seq_all([
        t(TermKind::Copy("X".into())),
        Term::par(Term::boxed("s"), id("X")),
        Term::boxed("q"),
    ])
    .unwrap();
    let a = build_from_term(&sig, &lp).unwrap();
    let b = build_from_term(&sig, &expected).unwrap();
    (sig, a, b)
}

fn fanout_model(sig: &Arc<Signature>) -> Model {
    let s = Kernel::new(vec![fs("X", 2)], vec![fs("W", 3)], vec![0.5, 0.5, 0.0, 0.1, 0.2, 0.7]).unwrap();
    let q = Kernel::new(
        vec![fs("W", 3), fs("X", 2)],
        vec![fs("Y", 2)],
        vec![1.0, 0.0, 0.25, 0.75, 0.5, 0.5, 0.0, 1.0, 0.8, 0.2, 0.4, 0.6],
    )
    .unwrap();
    Model::new(sig.clone(), vec![2, 3, 2], vec![s, q]).unwrap()
}

#[test]
fn fanout_contracts_to_the_expected_diagram() {
    let (_, lp, expected) = fanout();
    let tp = TracePartition::new(lp, 1).unwrap();
    assert!(is_nonsignalling(&tp));
    let c = contract(&tp).unwrap();
    assert_eq!(c, expected);
    assert_eq!(c.num_wires(), 3);
}

#[test]
fn fanout_semantics() {
    let (sig, lp, expected) = fanout();
    let m = fanout_model(&sig);
    let tp = TracePartition::new(lp.clone(), 1).unwrap();
    assert!(check_trace_soundness(&tp, &m, &TOL).unwrap().holds());
    // hand computation: y | x = sum_w s(w|x) q(y|w,x)
    let k = interpret(&expected, &m, &TOL).unwrap();
    let (s, q) = (m.kernel(0), m.kernel(1));
    for x in 0..2 {
        for y in 0..2 {
            let v: f64 = (0..3).map(|w| s.get(x, w) * q.get(w * 2 + x, y)).sum();
            assert!((k.get(x, y) - v).abs() < 1e-15);
        }
    }
    let traced = causal_trace(&interpret(&lp, &m, &TOL).unwrap(), 1, &TOL).unwrap();
    assert!(traced.max_abs_diff(&k).unwrap() < 1e-12);
}

#[test]
fn contraction_identity_on_the_state_shape() {
    let sig = Arc::new(identity_signature());
    let x = [fs("X", 3)];
    let xx = [fs("X", 3), fs("X", 3)];
    let y = [fs("Y", 2)];
    let p = Kernel::new(vec![], x.to_vec(), vec![0.25, 0.75, 0.0]).unwrap();
    let rows1 = [0.9, 0.5, 0.2, 0.3, 1.0, 0.4, 0.6, 0.6, 0.6];
    let rows2 = [0.9, 0.5, 0.2, 0.3, 1.0, 0.4, 0.0, 1.0, 0.25];
    let kernel = |r: &[f64]| Kernel::from_fn(xx.to_vec(), y.to_vec(), |i, j| if j == 0 { r[i] } else { 1.0 - r[i] }).unwrap();
    let m = Model::new(sig.clone(), vec![3, 2], vec![p, kernel(&rows1), kernel(&rows2)]).unwrap();
    let c1 = TracePartition::new(identity_shape(&sig, "f1").unwrap(), 1).unwrap();
    let c2 = TracePartition::new(identity_shape(&sig, "f2").unwrap(), 1).unwrap();
    // the diagrams differ but their interpretations agree, and so do the contractions
    assert_ne!(c1.diagram(), c2.diagram());
    match check_contraction_identity(&c1, &c2, &m, &TOL).unwrap() {
        IdentityVerdict::Holds { residual } => assert!(residual < 1e-12),
        other => panic!("{other:?}"),
    }
    // with p charging the third point the premise fails
    let p_full = Kernel::uniform(&x);
    let m2 = Model::new(sig, vec![3, 2], vec![p_full, kernel(&rows1), kernel(&rows2)]).unwrap();
    assert!(matches!(
        check_contraction_identity(&c1, &c2, &m2, &TOL).unwrap(),
        IdentityVerdict::Vacuous { .. }
    ));
}

#[test]
fn swap_is_yanked_on_both_levels() {
    let mut s = Signature::new();
    s.add_type("W").unwrap();
    let sig = Arc::new(s);
    let sw = Diagram::swap(&sig, &[0], &[0]).unwrap();
    let tp = TracePartition::new(sw, 1).unwrap();
    assert_eq!(contract(&tp).unwrap(), Diagram::identity(&sig, &[0]).unwrap());
    let m = Model::new(sig, vec![4], vec![]).unwrap();
    let v = check_trace_soundness(&tp, &m, &TOL).unwrap();
    assert!(v.holds(), "{v:?}");
}
