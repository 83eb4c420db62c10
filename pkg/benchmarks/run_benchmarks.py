"""
CLI for running benchmark suites and comparing them against a baseline.

Usage:
    python3 -m benchmarks.run_benchmarks --suite dynamics --save-baseline
    python3 -m benchmarks.run_benchmarks --suite dynamics --compare benchmarks/results/dynamics_baseline.json
"""
import argparse
import shutil
import sys
from pathlib import Path
from typing import Any, Dict

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from benchmarks.bench_dynamics import run_all_dynamics_benchmarks
from benchmarks.bench_oracles import run_all_oracle_benchmarks
from benchmarks.benchmark_runner import load_results
from benchmarks.config import RESULTS_DIR

SUITES = {
    "dynamics": (run_all_dynamics_benchmarks, "dynamics_benchmarks.json"),
    "oracles": (run_all_oracle_benchmarks, "oracle_benchmarks.json"),
}

# Relative change in wall time that counts as a regression or improvement
CHANGE_TOLERANCE = 0.10


def latest_by_name(path: Path) -> Dict[str, Dict[str, Any]]:
    """Latest result per benchmark name from an appended results file."""
    return {r["name"]: r for r in load_results(path)}


def baseline_path(suite: str) -> Path:
    return RESULTS_DIR / SUITES[suite][1].replace("benchmarks", "baseline")


def compare_results(baseline_file: Path, current_file: Path) -> int:
    """
    Print wall time and peak memory against a baseline.

    Returns:
        Number of regressed benchmarks
    """
    baseline = latest_by_name(baseline_file)
    current = latest_by_name(current_file)
    if not baseline:
        print(f"ERROR: no baseline results in {baseline_file}")
        return 0

    regressed = 0
    print(f"\n{'name':<32} {'base s':>9} {'now s':>9} {'change':>8} {'base MB':>8} {'now MB':>8}  status")
    print("-" * 90)
    for name in sorted(current):
        now = current[name]
        if name not in baseline:
            print(f"{name:<32} {'':>9} {now['elapsed_seconds']:>9.3f} {'':>8} {'':>8} {now['memory_used_mb']:>8.1f}  new")
            continue
        base = baseline[name]
        if base["elapsed_seconds"] <= 0:
            print(f"{name:<32} baseline time is zero, skipped")
            continue
        change = now["elapsed_seconds"] / base["elapsed_seconds"] - 1.0
        if change > CHANGE_TOLERANCE:
            status = "REGRESSED"
            regressed += 1
        elif change < -CHANGE_TOLERANCE:
            status = "improved"
        else:
            status = "stable"
        print(
            f"{name:<32} {base['elapsed_seconds']:>9.3f} {now['elapsed_seconds']:>9.3f} {change:>+8.1%} "
            f"{base.get('memory_used_mb', 0.0):>8.1f} {now['memory_used_mb']:>8.1f}  {status}"
        )
    print(f"\n{regressed} regression(s) beyond {CHANGE_TOLERANCE:.0%}\n")
    return regressed


def main() -> int:
    parser = argparse.ArgumentParser(description="Run majdyn performance benchmarks")
    parser.add_argument("--suite", choices=[*SUITES, "all"], default="all", help="Which benchmark suite to run")
    parser.add_argument("--compare", type=Path, help="Compare against baseline results file (single suite)")
    parser.add_argument("--save-baseline", action="store_true", help="Save current results as the suite baseline")
    args = parser.parse_args()

    suites = list(SUITES) if args.suite == "all" else [args.suite]
    if args.compare and len(suites) != 1:
        print("--compare requires --suite dynamics or --suite oracles")
        return 1

    print(f"Results directory: {RESULTS_DIR}")
    for suite in suites:
        runner, filename = SUITES[suite]
        print(f"\n=== {suite} ===")
        runner()
        current = RESULTS_DIR / filename
        if args.save_baseline and current.exists():
            shutil.copy(current, baseline_path(suite))
            print(f"Saved baseline to {baseline_path(suite)}")

    if args.compare:
        current = RESULTS_DIR / SUITES[suites[0]][1]
        if not current.exists():
            print(f"ERROR: No current results found at {current}")
            return 1
        return 2 if compare_results(args.compare, current) else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
