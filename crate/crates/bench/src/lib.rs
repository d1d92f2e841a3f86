//! Criterion benchmarks for `wavebif`; see `benches/`.
