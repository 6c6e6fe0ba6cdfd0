//! Bundled example documents.

/// The four-component example model: a TOP component fed by an AND gate
/// over two basic components C1 (temperature driven, repaired from a spare
/// stock) and C2 (driven by a sampled signal).
pub const FIG1: &str = include_str!("../fixtures/fig1.pdft");

/// Event log of sixteen runs: C1 fails while TOP is ok in ten of them and
/// TOP goes on to fail in four of those.
pub const ARL_LOG: &str = include_str!("../fixtures/arl_example.csv");
