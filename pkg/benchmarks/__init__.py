"""Performance benchmarks for the simulation kernels and oracles."""
