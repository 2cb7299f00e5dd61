"""Throughput benchmark of the scoring kernels.

Builds one forest, then scores the same query block point-by-point through
every available backend (mimicking stream usage, where each arrival is
scored individually).
"""

from __future__ import annotations

import time
from typing import Dict, List

from .backend import available_backends, default_backend
from .data import SynthSpec, synth_stream
from .forest import build_forest
from .scoring import ScoreParams, anomaly_score

__all__ = ["run_benchmark", "format_results"]


def run_benchmark(
    n_points: int = 2000,
    dims: int = 6,
    window_size: int = 128,
    num_trees: int = 60,
    seed: int = 1,
    passes: int = 3,
) -> List[Dict]:
    """Time per-point scoring for each backend; best of `passes` passes."""
    data = synth_stream(
        SynthSpec(n=window_size + n_points, dims=dims, outlier_rate=0.02, seed=seed)
    )
    window = data.points[:window_size]
    queries = data.points[window_size:]
    forest = build_forest(window, num_trees, seed)
    params = ScoreParams()

    results = []
    for backend in available_backends():
        # warm-up also populates the per-backend kernel cache
        anomaly_score(queries[0], forest, params, backend)
        best = float("inf")
        checksum = 0.0
        for _ in range(passes):
            start = time.perf_counter()
            checksum = 0.0
            for q in queries:
                checksum += anomaly_score(q, forest, params, backend)
            best = min(best, time.perf_counter() - start)
        results.append(
            {
                "backend": backend,
                "points": len(queries),
                "seconds": best,
                "us_per_point": best / len(queries) * 1e6,
                "points_per_s": len(queries) / best,
                "checksum": checksum,
                "default": backend == default_backend(),
            }
        )
    if len(results) > 1:
        base = next(r for r in results if r["backend"] == "python")
        for r in results:
            r["speedup_vs_python"] = base["seconds"] / r["seconds"]
    return results


def format_results(results: List[Dict]) -> str:
    lines = [
        f"{'backend':<10} {'points/s':>12} {'us/point':>10} {'speedup':>9}  default"
    ]
    for r in results:
        speedup = r.get("speedup_vs_python")
        lines.append(
            f"{r['backend']:<10} {r['points_per_s']:>12.0f} "
            f"{r['us_per_point']:>10.2f} "
            f"{speedup:>9.2f}x  {'*' if r['default'] else ''}"
            if speedup is not None
            else f"{r['backend']:<10} {r['points_per_s']:>12.0f} "
            f"{r['us_per_point']:>10.2f} {'':>10}  {'*' if r['default'] else ''}"
        )
    checks = {f"{r['checksum']:.9g}" for r in results}
    lines.append(
        "score checksums agree across backends"
        if len(checks) == 1
        else f"WARNING: checksums differ across backends: {sorted(checks)}"
    )
    return "\n".join(lines)
