//! Criterion benchmarks for the qms-core kernels; see `benches/`.
