"""
Benchmark harness: wall time, CPU time and peak resident memory of a block.

Peak resident memory is sampled from a background thread every
SAMPLE_INTERVAL_SECONDS, so temporaries freed inside the block still count.
"""
import json
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import psutil

from src import __version__

SAMPLE_INTERVAL_SECONDS = 0.005


@dataclass
class BenchmarkResult:
    """Measurements and custom metrics of one benchmark."""

    name: str
    elapsed_seconds: float = 0.0
    cpu_seconds: float = 0.0
    rss_start: int = 0
    rss_peak: int = 0
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def memory_used_mb(self) -> float:
        """Peak resident growth over the block, in MB."""
        return max(0, self.rss_peak - self.rss_start) / 1024 / 1024

    def add_metric(self, key: str, value: Any) -> None:
        self.metrics[key] = value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "version": __version__,
            "elapsed_seconds": self.elapsed_seconds,
            "cpu_seconds": self.cpu_seconds,
            "memory_used_mb": self.memory_used_mb,
            "timestamp": datetime.now().isoformat(),
            "metrics": self.metrics,
        }


class _PeakSampler(threading.Thread):
    def __init__(self, process: psutil.Process):
        super().__init__(daemon=True)
        self.process = process
        self.peak = process.memory_info().rss
        self._done = threading.Event()

    def run(self) -> None:
        while not self._done.wait(SAMPLE_INTERVAL_SECONDS):
            self.peak = max(self.peak, self.process.memory_info().rss)

    def stop(self) -> int:
        self._done.set()
        self.join()
        return max(self.peak, self.process.memory_info().rss)


@contextmanager
def benchmark(name: str) -> Iterator[BenchmarkResult]:
    """
    Measure a block.

    Usage:
        with benchmark("run_gnp_small") as result:
            trace, outcome = run(g, x0)
            result.add_metric("steps", outcome.steps)
    """
    process = psutil.Process()
    result = BenchmarkResult(name, rss_start=process.memory_info().rss)
    sampler = _PeakSampler(process)
    sampler.start()

    cpu_start = sum(process.cpu_times()[:2])
    wall_start = time.perf_counter()
    try:
        yield result
    finally:
        result.elapsed_seconds = time.perf_counter() - wall_start
        result.cpu_seconds = sum(process.cpu_times()[:2]) - cpu_start
        result.rss_peak = sampler.stop()


def load_results(path: Path) -> List[Dict[str, Any]]:
    if not path.exists():
        return []
    with open(path) as f:
        return json.load(f)


def save_benchmark_results(results: List[BenchmarkResult], output_file: Path) -> None:
    """Append results to a JSON list file (history is kept; readers take the latest per name)."""
    data = load_results(output_file) + [r.to_dict() for r in results]
    with open(output_file, "w") as f:
        json.dump(data, f, indent=2)
    print(f"Saved {len(results)} result(s) to {output_file}")


def print_results(results: List[BenchmarkResult], title: Optional[str] = None) -> None:
    print(f"\n{title or 'BENCHMARK RESULTS'}")
    print(f"{'name':<32} {'wall s':>9} {'cpu s':>9} {'peak MB':>9}  metrics")
    print("-" * 80)
    for r in results:
        metrics = ", ".join(f"{k}={v}" for k, v in r.metrics.items())
        print(f"{r.name:<32} {r.elapsed_seconds:>9.3f} {r.cpu_seconds:>9.3f} {r.memory_used_mb:>9.1f}  {metrics}")
    print()
