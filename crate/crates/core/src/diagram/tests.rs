use super::*;
use crate::hypergraph::HyperBox;
use crate::random::{standard_signature, DiagramGen};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig() -> Arc<Signature> {
    Arc::new(standard_signature())
}

fn ty(s: &Signature, n: &str) -> TypeId {
    s.type_id(n).unwrap()
}

fn gen(s: &Arc<Signature>, name: &str) -> Diagram {
    Diagram::generator_named(s, name).unwrap()
}

/// Brute-force isomorphism test: try every bijection of boxes, derive the wire map from the
/// sources (boundary ports and box outputs), then check everything matches.
fn iso_oracle(a: &Cospan, b: &Cospan) -> bool {
    let (ga, gb) = (&a.apex, &b.apex);
    if ga.num_wires() != gb.num_wires()
        || ga.num_boxes() != gb.num_boxes()
        || a.left.len() != b.left.len()
        || a.right.len() != b.right.len()
    {
        return false;
    }
    let n = ga.num_boxes();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if iso_under(a, b, &perm) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn iso_under(a: &Cospan, b: &Cospan, perm: &[usize]) -> bool {
    let (ga, gb) = (&a.apex, &b.apex);
    let mut map: Vec<Option<usize>> = vec![None; ga.num_wires()];
    let bind = |wa: usize, wb: usize, map: &mut Vec<Option<usize>>| match map[wa] {
        Some(x) => x == wb,
        None => {
            map[wa] = Some(wb);
            true
        }
    };
    for (&wa, &wb) in a.left.iter().zip(&b.left) {
        if !bind(wa, wb, &mut map) {
            return false;
        }
    }
    for (i, &j) in perm.iter().enumerate() {
        let (x, y) = (ga.hyperbox(i), gb.hyperbox(j));
        if x.label != y.label {
            return false;
        }
        for (&wa, &wb) in x.outputs.iter().zip(&y.outputs) {
            if !bind(wa, wb, &mut map) {
                return false;
            }
        }
    }
    let map: Vec<usize> = match map.into_iter().collect::<Option<Vec<_>>>() {
        Some(m) => m,
        None => return false,
    };
    let mut hit = vec![false; gb.num_wires()];
    for (wa, &wb) in map.iter().enumerate() {
        if hit[wb] || ga.wire_label(wa) != gb.wire_label(wb) {
            return false;
        }
        hit[wb] = true;
    }
    perm.iter().enumerate().all(|(i, &j)| {
        let ins: Vec<usize> = ga.hyperbox(i).inputs.iter().map(|&w| map[w]).collect();
        ins == gb.hyperbox(j).inputs
    }) && a.right.iter().map(|&w| map[w]).eq(b.right.iter().copied())
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Renumbers wires and boxes of a cospan by random permutations.
fn shuffle(c: &Cospan, rng: &mut ChaCha8Rng) -> Cospan {
    let g = &c.apex;
    let mut wp: Vec<usize> = (0..g.num_wires()).collect();
    wp.shuffle(rng);
    let mut bp: Vec<usize> = (0..g.num_boxes()).collect();
    bp.shuffle(rng);
    let mut wires = vec![0; g.num_wires()];
    for (old, &new) in wp.iter().enumerate() {
        wires[new] = g.wire_label(old);
    }
    let mut boxes = vec![None; g.num_boxes()];
    for (old, &new) in bp.iter().enumerate() {
        let bx = g.hyperbox(old);
        boxes[new] = Some(HyperBox {
            label: bx.label,
            inputs: bx.inputs.iter().map(|&w| wp[w]).collect(),
            outputs: bx.outputs.iter().map(|&w| wp[w]).collect(),
        });
    }
    let apex = Hypergraph::new(g.signature().clone(), wires, boxes.into_iter().map(Option::unwrap).collect()).unwrap();
    Cospan::new(
        apex,
        c.left.iter().map(|&w| wp[w]).collect(),
        c.right.iter().map(|&w| wp[w]).collect(),
    )
    .unwrap()
}

#[test]
fn two_sources_violate_left_monogamy() {
    let s = sig();
    let x = ty(&s, "X");
    let apex = Hypergraph::discrete(s.clone(), &[x]).unwrap();
    let c = Cospan::new(apex, vec![0, 0], vec![0]).unwrap();
    assert_eq!(
        Diagram::validate(c).err(),
        Some(DiagramError::NotLeftMonogamous { wire: 0, sources: 2 })
    );
    // no source at all
    let apex = Hypergraph::discrete(s.clone(), &[x]).unwrap();
    let c = Cospan::new(apex, vec![], vec![0]).unwrap();
    assert!(matches!(Diagram::validate(c), Err(DiagramError::NotLeftMonogamous { sources: 0, .. })));
}

#[test]
fn unused_box_is_eliminable() {
    let s = sig();
    let x = ty(&s, "X");
    let f = s.box_id("f").unwrap();
    let mut g = Hypergraph::empty(s.clone());
    let a = g.add_wire(x).unwrap();
    let b = g.add_wire(x).unwrap();
    g.add_box(f, vec![a], vec![b]).unwrap();
    let c = Cospan::new(g, vec![a], vec![a]).unwrap();
    assert_eq!(Diagram::validate(c.clone()).err(), Some(DiagramError::EliminableBox { box_id: 0 }));
    let d = Diagram::normalize(c).unwrap();
    assert_eq!(d, Diagram::identity(&s, &[x]).unwrap());
}

#[test]
fn cycles_are_rejected() {
    let s = sig();
    let x = ty(&s, "X");
    let f = s.box_id("f").unwrap();
    let mut g = Hypergraph::empty(s.clone());
    let a = g.add_wire(x).unwrap();
    g.add_box(f, vec![a], vec![a]).unwrap();
    let c = Cospan::new(g, vec![], vec![a]).unwrap();
    assert!(matches!(Diagram::validate(c), Err(DiagramError::Cyclic { .. })));
}

#[test]
fn normalisation_removes_chains() {
    // p ; f ; f ; del has nothing left
    let s = sig();
    let x = ty(&s, "X");
    let d = gen(&s, "p")
        .then(&gen(&s, "f"))
        .unwrap()
        .then(&gen(&s, "f"))
        .unwrap()
        .then(&Diagram::del(&s, x).unwrap())
        .unwrap();
    assert_eq!(d.num_boxes(), 0);
    assert_eq!(d.num_wires(), 0);
    assert_eq!(d, Diagram::identity(&s, &[]).unwrap());
}

#[test]
fn partial_use_keeps_the_box() {
    // h : Y -> X, Y with only its first output used
    let s = sig();
    let (x, y) = (ty(&s, "X"), ty(&s, "Y"));
    let d = gen(&s, "h")
        .then(&Diagram::identity(&s, &[x]).unwrap().tensor(&Diagram::del(&s, y).unwrap()).unwrap())
        .unwrap();
    assert_eq!(d.num_boxes(), 1);
    assert_eq!(d.dom(), vec![y]);
    assert_eq!(d.cod(), vec![x]);
}

#[test]
fn comonoid_equations() {
    let s = sig();
    let x = ty(&s, "X");
    let id = Diagram::identity(&s, &[x]).unwrap();
    let copy = Diagram::copy(&s, x).unwrap();
    let del = Diagram::del(&s, x).unwrap();
    let counit = copy.then(&del.tensor(&id).unwrap()).unwrap();
    assert_eq!(counit, id);
    let counit_r = copy.then(&id.tensor(&del).unwrap()).unwrap();
    assert_eq!(counit_r, id);
    let comm = copy.then(&Diagram::swap(&s, &[x], &[x]).unwrap()).unwrap();
    assert_eq!(comm, copy);
    let assoc_l = copy.then(&copy.tensor(&id).unwrap()).unwrap();
    let assoc_r = copy.then(&id.tensor(&copy).unwrap()).unwrap();
    assert_eq!(assoc_l, assoc_r);
}

#[test]
fn swap_is_involutive_but_not_identity() {
    let s = sig();
    let (x, y) = (ty(&s, "X"), ty(&s, "Y"));
    let sw = Diagram::swap(&s, &[x], &[y]).unwrap();
    let back = sw.then(&Diagram::swap(&s, &[y], &[x]).unwrap()).unwrap();
    assert_eq!(back, Diagram::identity(&s, &[x, y]).unwrap());
    let sxx = Diagram::swap(&s, &[x], &[x]).unwrap();
    assert_ne!(sxx, Diagram::identity(&s, &[x, x]).unwrap());
}

#[test]
fn copying_a_box_output_differs_from_two_boxes() {
    // f ; copy versus copy ; f * f: equal only for deterministic maps
    let s = sig();
    let x = ty(&s, "X");
    let f = gen(&s, "f");
    let copy = Diagram::copy(&s, x).unwrap();
    let a = f.then(&copy).unwrap();
    let b = copy.then(&f.tensor(&f).unwrap()).unwrap();
    assert_ne!(a, b);
    assert_eq!(a.num_boxes(), 1);
    assert_eq!(b.num_boxes(), 2);
}

#[test]
fn boundary_mismatch_is_reported() {
    let s = sig();
    let r = gen(&s, "g").then(&gen(&s, "f"));
    assert!(matches!(r, Err(DiagramError::BoundaryMismatch { .. })));
}

#[test]
fn canonical_form_is_ascii_records() {
    let s = sig();
    let d = gen(&s, "f");
    let text = String::from_utf8(d.canonical_form()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("dom "));
    assert!(lines[1].starts_with("box "));
    assert!(lines[2].starts_with("cod "));
}

#[test]
fn canonical_agrees_with_brute_force_isomorphism() {
    let s = sig();
    let gen = DiagramGen::new(s.clone(), 4, 6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pool: Vec<Diagram> = (0..40).map(|_| gen.diagram(&mut rng)).collect();
    let mut equal_pairs = 0;
    for a in &pool {
        for b in &pool {
            let oracle = iso_oracle(a.cospan(), b.cospan());
            assert_eq!(a == b, oracle, "{a:?}\n{b:?}");
            equal_pairs += oracle as usize;
        }
        let sh = Diagram::validate(shuffle(a.cospan(), &mut rng)).unwrap();
        assert!(iso_oracle(a.cospan(), sh.cospan()));
        assert_eq!(*a, sh);
    }
    assert!(equal_pairs >= pool.len());
}

#[test]
fn canonical_representative_is_isomorphic() {
    let gen = DiagramGen::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let d = gen.diagram(&mut rng);
        let c = d.canonical();
        assert!(iso_oracle(d.cospan(), c.cospan()));
        assert_eq!(c.canonical_form(), d.canonical_form());
    }
}

#[test]
fn terms_round_trip() {
    let gen = DiagramGen::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..100 {
        let d = gen.diagram(&mut rng);
        let t = to_term(&d);
        let back = build_from_term(d.signature(), &t).unwrap();
        assert_eq!(back, d, "{t}");
    }
}

#[test]
fn term_errors() {
    let s = sig();
    let unknown = Term::boxed("nope");
    assert!(matches!(build_from_term(&s, &unknown), Err(DiagramError::UnknownIdentifier { .. })));
    let bad = Term::seq(Term::boxed("g"), Term::boxed("f"));
    assert!(build_from_term(&s, &bad).is_err());
}

#[test]
fn term_display() {
    let t = Term::seq(
        Term::par(Term::boxed("f"), Term::id(["X"])),
        Term::new(TermKind::Swap("X".into(), "Y".into())),
    );
    assert_eq!(t.to_string(), "f * id(X) ; swap(X, Y)");
}

proptest! {
    #[test]
    fn canonical_form_ignores_numbering(seed in any::<u64>()) {
        let gen = DiagramGen::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = gen.diagram(&mut rng);
        let sh = Diagram::validate(shuffle(d.cospan(), &mut rng)).unwrap();
        prop_assert_eq!(d.canonical_form(), sh.canonical_form());
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let gen = DiagramGen::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen.types(&mut rng, 0, 2);
        let b = gen.types(&mut rng, 0, 2);
        let c = gen.types(&mut rng, 0, 2);
        let d = gen.types(&mut rng, 0, 2);
        let f = gen.diagram_between(&mut rng, &a, &b);
        let g = gen.diagram_between(&mut rng, &b, &c);
        let h = gen.diagram_between(&mut rng, &c, &d);
        let l = f.then(&g).unwrap().then(&h).unwrap();
        let r = f.then(&g.then(&h).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn interchange_law(seed in any::<u64>()) {
        let gen = DiagramGen::new(sig(), 3, 6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen.types(&mut rng, 0, 1);
        let b = gen.types(&mut rng, 0, 1);
        let c = gen.types(&mut rng, 0, 1);
        let d = gen.types(&mut rng, 0, 1);
        let e = gen.types(&mut rng, 0, 1);
        let k = gen.types(&mut rng, 0, 1);
        let f1 = gen.diagram_between(&mut rng, &a, &b);
        let g1 = gen.diagram_between(&mut rng, &b, &c);
        let f2 = gen.diagram_between(&mut rng, &d, &e);
        let g2 = gen.diagram_between(&mut rng, &e, &k);
        let l = f1.tensor(&f2).unwrap().then(&g1.tensor(&g2).unwrap()).unwrap();
        let r = f1.then(&g1).unwrap().tensor(&f2.then(&g2).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn results_are_valid_diagrams(seed in any::<u64>()) {
        let gen = DiagramGen::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = gen.diagram(&mut rng);
        prop_assert!(Diagram::validate(d.cospan().clone()).is_ok());
        prop_assert!(eliminable_boxes(d.cospan()).is_empty());
    }
}
