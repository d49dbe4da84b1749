//! Criterion benchmarks for demaudit-core; see `benches/`.
