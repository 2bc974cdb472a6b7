//! Criterion benchmarks for the paradisp kernels live in `benches/`.
