//! Benchmark harness for `pitman-core`; the benchmarks live in `benches/`.
