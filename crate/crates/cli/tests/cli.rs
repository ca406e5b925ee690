mod common;

use common::{check_case, data_dir, mtrace, CASES};
use markov_trace_cli::dsl::parse;

#[test]
fn golden_outputs() {
    let failures: Vec<String> = CASES.iter().filter_map(|c| check_case(c).err()).collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn contracting_the_fanout_loop_gives_the_expected_diagram() {
    let (code, out, _) = mtrace(&["contract", "@fanout_feedback.diag", "--diag", "loop", "--feedback", "1"]);
    assert_eq!(code, 0);
    let contracted = parse(&out).unwrap();
    let src = parse(&std::fs::read_to_string(data_dir().join("fanout_feedback.diag")).unwrap()).unwrap();
    let expected = src.diagram("expected").unwrap();
    let got = contracted.diagram("loop").unwrap();
    assert_eq!(got.canonical_form(), expected.canonical_form());
    assert_eq!(got.num_wires(), 3);
}

#[test]
fn contraction_identity_premise_and_conclusion() {
    // lhs and rhs evaluate equally, so their contractions must too
    let eval = |d| mtrace(&["eval", "@state_feedback.diag", "--diag", d, "--model", "@state_feedback.model.json"]);
    assert_eq!(eval("lhs").1, eval("rhs").1);
    let check = |d| {
        mtrace(&[
            "trace-check", "@state_feedback.diag", "--diag", d, "--feedback", "1", "--model",
            "@state_feedback.model.json",
        ])
    };
    let (l, r) = (check("lhs"), check("rhs"));
    assert_eq!((l.0, r.0), (0, 0));
    assert_eq!(l.1, r.1);
    assert!(l.1.contains("\"verdict\": \"holds\""));
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("mtrace-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };

    let bad = write("bad.diag", "type X;\nbox f : X -> X;\ndiag d = f ; g\n");
    let (code, _, err) = mtrace(&["validate", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("3:14: unknown identifier `g`"), "{err}");

    let signalling = write("sig.diag", "type X;\ndiag d = id(X)\n");
    let (code, out, _) = mtrace(&["nonsignalling", &signalling, "--feedback", "1"]);
    assert_eq!((code, out.as_str()), (1, "false\n"));
    let (code, _, err) = mtrace(&["contract", &signalling, "--feedback", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("signals"), "{err}");

    let (code, _, _) = mtrace(&["contract", &signalling, "--feedback", "3"]);
    assert_eq!(code, 2);
    let (code, _, _) = mtrace(&["validate", "/nonexistent/file.diag"]);
    assert_eq!(code, 2);
    let (code, _, _) = mtrace(&["normalize", "@state_feedback.diag"]);
    assert_eq!(code, 2, "two diagrams and no --diag");
    let (code, _, _) = mtrace(&["frobnicate"]);
    assert_eq!(code, 2);

    let model = write("model.json", r#"{"types": {"X": 2, "Y": 2}, "boxes": {}}"#);
    let (code, _, err) = mtrace(&["eval", "@state_feedback.diag", "--diag", "lhs", "--model", &model]);
    assert_eq!(code, 1);
    assert!(err.contains("no kernel for box `p`"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identity_evaluates_to_the_identity_matrix() {
    let dir = std::env::temp_dir().join(format!("mtrace-id-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("id.diag");
    std::fs::write(&src, "type X;\ndiag d = id_X\n").unwrap();
    let model = dir.join("m.json");
    std::fs::write(&model, r#"{"types": {"X": 2}, "boxes": {}}"#).unwrap();
    let (code, out, _) = mtrace(&["eval", src.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("[1.0, 0.0],\n    [0.0, 1.0]"), "{out}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn comb_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("mtrace-comb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (_, ext, _) = mtrace(&["comb", "extend", "@comb.json"]);
    let kernel = dir.join("ext.json");
    std::fs::write(&kernel, &ext).unwrap();
    let (code, rebuilt, err) = mtrace(&["comb", "from-nonsignalling", kernel.to_str().unwrap(), "--b-out", "1", "--b", "1"]);
    assert_eq!(code, 0, "{err}");
    let comb2 = dir.join("comb2.json");
    std::fs::write(&comb2, &rebuilt).unwrap();
    let (code, out, err) = mtrace(&["comb", "equiv", "@comb.json", comb2.to_str().unwrap(), "--contexts", "20"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, "{\"extensional\": true, \"contexts_checked\": 20}\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn laws_report_is_clean() {
    let (code, out, _) = mtrace(&["laws", "--seed", "42", "--cases", "30", "--confluence", "2"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["laws"].as_array().unwrap().len(), markov_trace::laws::LAWS.len());
    assert_eq!(v["confluence"]["failures"], 0);
    let (code, _, _) = mtrace(&["laws", "--only", "no.such.law"]);
    assert_eq!(code, 2);
}
