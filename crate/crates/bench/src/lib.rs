//! Criterion benchmarks for the kernels of `subrec`; see `benches/kernels.rs`.
