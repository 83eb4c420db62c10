"""Benchmark configuration and constants."""
from pathlib import Path

# Vertex counts per tier
BENCHMARK_SIZES = {
    "tiny": 1_000,      # smoke test
    "small": 10_000,    # quick validation
    "medium": 100_000,  # desk-scale random regular graphs
    "large": 1_000_000, # largest G(n, p) we keep in memory comfortably
}

# Mean degree used for G(n, p) benchmarks (p = d / n)
GNP_MEAN_DEGREE = 10

# Arity for the Fourier benchmark (2^k truth table)
FOURIER_ARITY = 21

# Fixed seed so timings compare like with like
BENCHMARK_SEED = 12345

# Benchmark results directory
RESULTS_DIR = Path(__file__).parent / "results"
RESULTS_DIR.mkdir(exist_ok=True)
