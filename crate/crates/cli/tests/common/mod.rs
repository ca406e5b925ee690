//! Golden-file cases shared by the CLI tests and the acceptance target.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Case {
    pub golden: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const CASES: &[Case] = &[
    Case { golden: "validate_state", args: &["validate", "@state_feedback.diag"], code: 0 },
    Case { golden: "validate_fanout", args: &["validate", "@fanout_feedback.diag"], code: 0 },
    Case { golden: "normalize_fanout", args: &["normalize", "@fanout_feedback.diag", "--diag", "loop"], code: 0 },
    Case {
        golden: "normalize_fanout_graph",
        args: &["normalize", "@fanout_feedback.diag", "--diag", "loop", "--form", "graph"],
        code: 0,
    },
    Case {
        golden: "contract_fanout",
        args: &["contract", "@fanout_feedback.diag", "--diag", "loop", "--feedback", "1"],
        code: 0,
    },
    Case {
        golden: "contract_state",
        args: &["contract", "@state_feedback.diag", "--diag", "lhs", "--feedback", "1"],
        code: 0,
    },
    Case {
        golden: "nonsignalling_fanout",
        args: &["nonsignalling", "@fanout_feedback.diag", "--diag", "loop", "--feedback", "1"],
        code: 0,
    },
    Case {
        golden: "eval_fanout",
        args: &["eval", "@fanout_feedback.diag", "--diag", "loop", "--model", "@fanout_feedback.model.json"],
        code: 0,
    },
    Case {
        golden: "eval_state",
        args: &["eval", "@state_feedback.diag", "--diag", "lhs", "--model", "@state_feedback.model.json"],
        code: 0,
    },
    Case {
        golden: "trace_check_fanout",
        args: &[
            "trace-check", "@fanout_feedback.diag", "--diag", "loop", "--feedback", "1", "--model",
            "@fanout_feedback.model.json",
        ],
        code: 0,
    },
    Case {
        golden: "trace_check_state_lhs",
        args: &[
            "trace-check", "@state_feedback.diag", "--diag", "lhs", "--feedback", "1", "--model",
            "@state_feedback.model.json",
        ],
        code: 0,
    },
    Case {
        golden: "trace_check_state_rhs",
        args: &[
            "trace-check", "@state_feedback.diag", "--diag", "rhs", "--feedback", "1", "--model",
            "@state_feedback.model.json",
        ],
        code: 0,
    },
    Case { golden: "render_fanout", args: &["render", "@fanout_feedback.diag", "--diag", "loop", "--dot"], code: 0 },
    Case {
        golden: "render_fanout_expected",
        args: &["render", "@fanout_feedback.diag", "--diag", "expected", "--dot"],
        code: 0,
    },
    Case { golden: "render_state", args: &["render", "@state_feedback.diag", "--diag", "lhs", "--dot"], code: 0 },
    Case { golden: "comb_extend", args: &["comb", "extend", "@comb.json"], code: 0 },
    Case { golden: "comb_insert", args: &["comb", "insert", "@comb.json", "--context", "@context.json"], code: 0 },
];

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs the binary; `@name` arguments are resolved against the data directory.
pub fn mtrace(args: &[&str]) -> (i32, String, String) {
    let resolved: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(f) => data_dir().join(f).to_string_lossy().into_owned(),
            None => a.to_string(),
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_mtrace"))
        .args(&resolved)
        .output()
        .expect("run mtrace");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

/// Checks one case against its golden file (rewriting it when `MTRACE_UPDATE_GOLDEN` is set).
/// The command is run twice and both outputs must be identical.
pub fn check_case(case: &Case) -> Result<(), String> {
    let (code, first, err) = mtrace(case.args);
    if code != case.code {
        return Err(format!("{}: exit {code}, expected {}; stderr: {err}", case.golden, case.code));
    }
    let (_, second, _) = mtrace(case.args);
    if first != second {
        return Err(format!("{}: output differs between runs", case.golden));
    }
    let path = golden_dir().join(format!("{}.out", case.golden));
    if std::env::var_os("MTRACE_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &first).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != first {
        return Err(format!("{}: output differs from {}\n{first}", case.golden, path.display()));
    }
    Ok(())
}
