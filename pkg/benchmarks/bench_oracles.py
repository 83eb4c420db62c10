"""
Benchmarks for the exact oracles and the spectral estimate.
"""
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.analysis import estimate_lambda, fourier_spectrum, majority_truth_table, overlap_correlation_exact
from src.generators import Rng, gen_gnp
from benchmarks.benchmark_runner import benchmark, save_benchmark_results, print_results
from benchmarks.config import BENCHMARK_SEED, FOURIER_ARITY, RESULTS_DIR


def bench_fourier(k: int = FOURIER_ARITY):
    """Benchmark the fast Walsh-Hadamard transform of Maj_k."""
    table = majority_truth_table(k)
    with benchmark(f"fourier_maj{k}") as result:
        spectrum = fourier_spectrum(table, k)
        result.add_metric("entries", int(table.shape[0]))
        result.add_metric("parseval", spectrum.parseval())
    return result


def bench_lambda(n: int = 2000, p: float = 0.1):
    """Benchmark power iteration for ||P - Q|| on G(n, p)."""
    rng = Rng(BENCHMARK_SEED, 0)
    g = gen_gnp(n, p, rng.child(0))
    with benchmark(f"lambda_gnp_{n}") as result:
        estimate = estimate_lambda(g, p, rng.child(1))
        result.add_metric("lambda", estimate.lam)
        result.add_metric("iterations", estimate.iterations)
    return result


def bench_overlap(n: int = 23):
    """Benchmark the exact overlap correlation at the arity cap."""
    with benchmark(f"overlap_{n}") as result:
        value = overlap_correlation_exact(n, n, n // 2)
        result.add_metric("correlation", float(value))
    return result


def run_all_oracle_benchmarks():
    results = []
    for bench in (bench_fourier, bench_lambda, bench_overlap):
        try:
            results.append(bench())
        except Exception as e:
            print(f"  Error in {bench.__name__}: {e}")

    output_file = RESULTS_DIR / "oracle_benchmarks.json"
    save_benchmark_results(results, output_file)
    print_results(results)

    return results


if __name__ == "__main__":
    run_all_oracle_benchmarks()
