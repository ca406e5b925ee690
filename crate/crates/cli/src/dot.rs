//! Graphviz output.
//!
//! Inputs sit on the left and outputs on the right. Boxes are nodes, wires are edges labelled
//! by their type; a wire with several consumers fans out and one with none ends in a small dot.
//! Node and edge order follow the canonical numbering, so the text only depends on the
//! isomorphism class.

use std::fmt::Write as _;

use markov_trace::Diagram;

fn quote(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

pub fn render(d: &Diagram, name: &str) -> String {
    let d = d.canonical();
    let sig = d.signature();
    let c = d.cospan();
    let g = &c.apex;
    let ty = |w: usize| sig.type_name(g.wire_label(w));

    // where each wire comes from: an input port or (box, output port)
    let mut source = vec![String::new(); g.num_wires()];
    for (i, &w) in c.left.iter().enumerate() {
        source[w] = format!("in{i}");
    }
    for (b, bx) in g.boxes().iter().enumerate() {
        for (port, &w) in bx.outputs.iter().enumerate() {
            source[w] = if bx.outputs.len() > 1 {
                format!("b{b}:o{port}")
            } else {
                format!("b{b}")
            };
        }
    }

    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\", fontsize=10];\n");
    if !c.left.is_empty() {
        out.push_str("  { rank=source;");
        for (i, &w) in c.left.iter().enumerate() {
            write!(out, " in{i} [shape=plaintext, label={}];", quote(&format!("{}:{}", i, ty(w)))).unwrap();
        }
        out.push_str(" }\n");
    }
    if !c.right.is_empty() {
        out.push_str("  { rank=sink;");
        for (i, &w) in c.right.iter().enumerate() {
            write!(out, " out{i} [shape=plaintext, label={}];", quote(&format!("{}:{}", i, ty(w)))).unwrap();
        }
        out.push_str(" }\n");
    }
    for (b, bx) in g.boxes().iter().enumerate() {
        let label = &sig.box_sig(bx.label).name;
        if bx.inputs.len() > 1 || bx.outputs.len() > 1 {
            // record shape with one port per input and output
            let ports = |prefix: char, n: usize| -> String {
                (0..n).map(|p| format!("<{prefix}{p}>")).collect::<Vec<_>>().join("|")
            };
            writeln!(
                out,
                "  b{b} [shape=record, label=\"{{{{{}}}|{}|{{{}}}}}\"];",
                ports('i', bx.inputs.len()),
                label.replace('"', "\\\""),
                ports('o', bx.outputs.len())
            )
            .unwrap();
        } else {
            writeln!(out, "  b{b} [shape=box, label={}];", quote(label)).unwrap();
        }
    }
    let mut used = vec![false; g.num_wires()];
    for (b, bx) in g.boxes().iter().enumerate() {
        for (port, &w) in bx.inputs.iter().enumerate() {
            used[w] = true;
            let head = if bx.inputs.len() > 1 || bx.outputs.len() > 1 {
                format!("b{b}:i{port}")
            } else {
                format!("b{b}")
            };
            writeln!(out, "  {} -> {head} [label={}];", source[w], quote(ty(w))).unwrap();
        }
    }
    for (i, &w) in c.right.iter().enumerate() {
        used[w] = true;
        writeln!(out, "  {} -> out{i} [label={}];", source[w], quote(ty(w))).unwrap();
    }
    for w in (0..g.num_wires()).filter(|&w| !used[w]) {
        writeln!(out, "  del{w} [shape=point];").unwrap();
        writeln!(out, "  {} -> del{w} [label={}, arrowhead=none];", source[w], quote(ty(w))).unwrap();
    }
    out.push_str("}\n");
    out
}
