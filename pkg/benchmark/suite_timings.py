import time
import tracemalloc
from dataclasses import dataclass
from statistics import median
from typing import Literal

import psutil
from rich.console import Console
from rich.table import Table
from typing_extensions import assert_never

from toeplitz_lattice.quantization.geometry import GroupAction
from toeplitz_lattice.quantization.sections import _build_sections
from toeplitz_lattice.quantization.toeplitz import height, toeplitz
from toeplitz_lattice.semiclassics import probability_sequence, trace_sequence

Workloads = Literal["Toeplitz k=100", "Trace sweep serial", "Trace sweep 4 workers", "Probability sweep"]
K_VALUES = list(range(10, 101, 10))


@dataclass
class BenchmarkResult:
    workload: Workloads
    execution_time: float
    wall_time: float
    memory_used_mb: float
    rss_memory_mb: float


def run_workload(workload: Workloads):
    if workload == "Toeplitz k=100":
        toeplitz(height(), 100)
    elif workload == "Trace sweep serial":
        trace_sequence(height(), K_VALUES)
    elif workload == "Trace sweep 4 workers":
        trace_sequence(height(), K_VALUES, workers=4)
    elif workload == "Probability sweep":
        probability_sequence(GroupAction.circle(), 0, K_VALUES)
    else:
        assert_never(workload)


def run_benchmark(workload: Workloads) -> BenchmarkResult:
    # section spaces are cached across calls, measure cold builds
    _build_sections.cache_clear()
    tracemalloc.start()
    process = psutil.Process()
    cpu_before = time.process_time()
    wall_before = time.perf_counter()

    run_workload(workload)

    wall_after = time.perf_counter()
    cpu_after = time.process_time()
    current, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    mem_info = process.memory_info()

    return BenchmarkResult(
        workload=workload,
        execution_time=cpu_after - cpu_before,
        wall_time=wall_after - wall_before,
        memory_used_mb=peak / (1024 * 1024),
        rss_memory_mb=mem_info.rss / (1024 * 1024),
    )


def benchmark():
    """Run every workload a few times and report the medians"""
    workloads: list[Workloads] = [
        "Toeplitz k=100",
        "Trace sweep serial",
        "Trace sweep 4 workers",
        "Probability sweep",
    ]
    num_runs = 5
    all_results: dict[Workloads, list[BenchmarkResult]] = {w: [] for w in workloads}
    console = Console()

    for workload in workloads:
        console.print(f"\n[bold cyan]Running benchmark for {workload}[/bold cyan]")
        for i in range(num_runs):
            result = run_benchmark(workload)
            all_results[workload].append(result)
            console.print(f"Run {i + 1}: {result.wall_time:.2f}s wall, {result.memory_used_mb:.1f} MB peak")

    table = Table(title="Benchmark Median Results")
    table.add_column("Workload", justify="left", style="cyan", no_wrap=True)
    table.add_column("CPU Time (s)", justify="right", style="green")
    table.add_column("Wall Time (s)", justify="right", style="green")
    table.add_column("Memory Used (MB)", justify="right", style="green")
    table.add_column("RSS Memory (MB)", justify="right", style="green")

    for workload, results in all_results.items():
        table.add_row(
            workload,
            f"{median(r.execution_time for r in results):.2f}",
            f"{median(r.wall_time for r in results):.2f}",
            f"{median(r.memory_used_mb for r in results):.2f}",
            f"{median(r.rss_memory_mb for r in results):.2f}",
        )

    console.print("\n", table)


if __name__ == "__main__":
    benchmark()
