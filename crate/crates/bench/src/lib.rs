//! Criterion benchmarks for the verbpat solver; see `benches/`.
