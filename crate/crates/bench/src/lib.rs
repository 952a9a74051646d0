//! Benchmarks for the segsum pipeline live under `benches/`.
