//! Criterion benchmarks for the localization engines; see `benches/`.
