//! Front-end for `markov-trace`: the diagram language, JSON formats for kernels, models and
//! combs, Graphviz output and the `mtrace` subcommands.

pub mod cmd;
pub mod dot;
pub mod dsl;
pub mod json;
