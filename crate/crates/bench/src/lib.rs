//! Criterion benchmarks of the solver kernels; see `benches/kernels.rs`.
