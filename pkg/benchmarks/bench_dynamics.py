"""
Benchmarks for graph generation and the dynamics kernel.
Measures generation time, time per step, and batched exhaustive evolution.
"""
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.dynamics import run, run_batch
from src.generators import LevelGraphSpec, Rng, gen_cycle, gen_gnp, gen_opinions_iid, gen_random_regular
from src.experiments.invariants import all_states
from benchmarks.benchmark_runner import benchmark, save_benchmark_results, print_results
from benchmarks.config import BENCHMARK_SEED, BENCHMARK_SIZES, GNP_MEAN_DEGREE, RESULTS_DIR


def bench_generate_gnp(size: str):
    """Benchmark G(n, p) sampling at mean degree GNP_MEAN_DEGREE."""
    n = BENCHMARK_SIZES[size]
    with benchmark(f"generate_gnp_{size}") as result:
        g = gen_gnp(n, GNP_MEAN_DEGREE / n, Rng(BENCHMARK_SEED, 0))
        result.add_metric("n", n)
        result.add_metric("edges", g.m)
    return result


def bench_generate_rrg(size: str, d: int = 4):
    """Benchmark random d-regular sampling by rejection."""
    n = BENCHMARK_SIZES[size]
    with benchmark(f"generate_rrg_d{d}_{size}") as result:
        g = gen_random_regular(n, d, Rng(BENCHMARK_SEED, 0))
        result.add_metric("n", n)
        result.add_metric("edges", g.m)
    return result


def bench_run_gnp(size: str):
    """Benchmark a full run to period two on G(n, p) from fair opinions."""
    n = BENCHMARK_SIZES[size]
    rng = Rng(BENCHMARK_SEED, 0)
    g = gen_gnp(n, GNP_MEAN_DEGREE / n, rng.child(0))
    x0 = gen_opinions_iid(n, 0.5, rng.child(1))

    with benchmark(f"run_gnp_{size}") as result:
        trace, outcome = run(g, x0)
        result.add_metric("steps", outcome.steps)
        result.add_metric("kind", outcome.kind.value)
    result.add_metric("ms_per_step", 1000 * result.elapsed_seconds / max(outcome.steps, 1))
    return result


def bench_run_level(depth: int = 12):
    """Benchmark the matrix-free level operator up to its depth."""
    spec = LevelGraphSpec(depth)
    x0 = gen_opinions_iid(spec.n, 0.5, Rng(BENCHMARK_SEED, 0))
    with benchmark(f"run_level_depth{depth}") as result:
        trace, outcome = run(spec, x0, max_steps=depth, record_states=True)
        result.add_metric("n", spec.n)
        result.add_metric("steps", outcome.steps)
    return result


def bench_exhaustive_cycle(n: int = 12):
    """Benchmark batched evolution of all 2^n states of a cycle."""
    g = gen_cycle(n)
    X0 = all_states(n)
    with benchmark(f"exhaustive_cycle_{n}") as result:
        batch = run_batch(g, X0, max_steps=4 * n)
        result.add_metric("states", X0.shape[1])
        result.add_metric("all_converged", batch.all_converged)
    return result


def run_all_dynamics_benchmarks():
    """Run dynamics benchmarks across tiers."""
    results = []

    for size in ["tiny", "small", "medium"]:  # Skip "large" by default (too slow)
        print(f"\nBenchmarking {size} graphs ({BENCHMARK_SIZES[size]} vertices)...")

        for bench in (bench_generate_gnp, bench_generate_rrg, bench_run_gnp):
            try:
                results.append(bench(size))
            except Exception as e:
                print(f"  Error in {bench.__name__}_{size}: {e}")

    for bench in (bench_run_level, bench_exhaustive_cycle):
        try:
            results.append(bench())
        except Exception as e:
            print(f"  Error in {bench.__name__}: {e}")

    output_file = RESULTS_DIR / "dynamics_benchmarks.json"
    save_benchmark_results(results, output_file)
    print_results(results)

    return results


if __name__ == "__main__":
    run_all_dynamics_benchmarks()
