"""
rotorxy Benchmark Suite: literature-scale acceptance runs.

Task 1 (exact):      L=4 Monte Carlo against the transfer-matrix energy and stiffness
Task 2 (low_t):      L=32, T=0.2 stiffness against the spin-wave value 1 - T/4
Task 3 (gauge):      L=16 distributed vs boundary twist at T in {0.5, 0.7, 1.1}
Task 4 (kt):         L=64 sweep over T in [0.6, 1.2], 25 points, KT crossing in [0.84, 0.95]
Task 5 (resilience): lambda(sigma) from the task 4 table, plus the d=3 size scan

Results are exported to benchmarks/results/ as one JSON file per task and a combined
all_benchmarks.json.

Usage:
    python benchmarks/run_benchmarks.py                 # Run all tasks
    python benchmarks/run_benchmarks.py --task 2        # Run only task 2
    python benchmarks/run_benchmarks.py --task 4 -j 8   # KT sweep on 8 workers
    python benchmarks/run_benchmarks.py --quick         # Shorter chains for a smoke run
"""

from __future__ import annotations

import math
import sys
import time
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

# Ensure project root is on path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from rotorxy.core.engine import SweepEngine, run_point, temperature_grid  # noqa: E402
from rotorxy.core.models import LimitMode, MCParams  # noqa: E402
from rotorxy.exact.dual import energy_exact, stiffness_exact  # noqa: E402
from rotorxy.rotor.resilience import (  # noqa: E402
    StiffnessTable,
    lambda_size_scan,
    lambda_sweep,
)
from rotorxy.utils.log import setup_logging  # noqa: E402
from rotorxy.utils.output import build_meta, write_csv, write_json  # noqa: E402

console = Console()
RESULTS_DIR = Path(__file__).parent / "results"

Task = Callable[[dict[str, Any]], dict[str, Any]]


def _sweeps(ctx: dict[str, Any], full: int) -> int:
    return max(full // 20, 5_000) if ctx["quick"] else full


# ============================================================================
# Benchmark Tasks
# ============================================================================

def task_exact(ctx: dict[str, Any]) -> dict[str, Any]:
    """L=4, T=0.8 chain within 4 standard errors of the exact values (Q=7)."""
    params = MCParams(size=4, temperature=0.8, sweeps=_sweeps(ctx, 200_000), seed=21)
    point = run_point(params, n_bins=50)
    e_exact = energy_exact(4, params.beta, cutoff=7)
    rho_exact = stiffness_exact(4, params.beta, cutoff=7)
    e_dev = abs(point.energy[0] - e_exact) / point.energy[1]
    rho_dev = abs(point.distributed.rho_s - rho_exact) / point.distributed.error
    return {
        "passed": e_dev < 4.0 and rho_dev < 4.0,
        "energy_mc": point.energy, "energy_exact": e_exact, "energy_sigmas": e_dev,
        "rho_mc": point.distributed.rho_s, "rho_exact": rho_exact, "rho_sigmas": rho_dev,
    }


def task_low_t(ctx: dict[str, Any]) -> dict[str, Any]:
    """L=32, T=0.2: rho_s within [0.93, 0.97]."""
    params = MCParams(size=32, temperature=0.2, sweeps=_sweeps(ctx, 100_000), seed=22)
    point = run_point(params)
    rho = point.distributed.rho_s
    return {
        "passed": 0.93 <= rho <= 0.97,
        "rho_s": rho, "rho_s_err": point.distributed.error, "spin_wave": 1.0 - 0.2 / 4.0,
    }


def task_gauge(ctx: dict[str, Any]) -> dict[str, Any]:
    """L=16: the two twist placements agree within 3 combined errors."""
    engine = SweepEngine(workers=ctx["workers"])
    base = MCParams(size=16, temperature=0.5, sweeps=_sweeps(ctx, 200_000), seed=23)
    result = engine.sweep(base, [0.5, 0.7, 1.1])
    rows = []
    for p in result.points:
        combined = math.hypot(p.distributed.error, p.boundary.error)
        rows.append({
            "T": p.params.temperature,
            "distributed": p.distributed.rho_s,
            "boundary": p.boundary.rho_s,
            "sigmas": abs(p.distributed.rho_s - p.boundary.rho_s) / combined,
        })
    return {"passed": all(r["sigmas"] < 3.0 for r in rows), "points": rows}


def task_kt(ctx: dict[str, Any]) -> dict[str, Any]:
    """L=64 sweep: crossing with rho_s = 2T/pi in [0.84, 0.95], under 30 minutes."""
    engine = SweepEngine(workers=ctx["workers"])
    base = MCParams(size=64, temperature=0.6, sweeps=_sweeps(ctx, 200_000), seed=24)
    start = time.time()
    result = engine.sweep(base, temperature_grid(0.6, 1.2, 25))
    elapsed = time.time() - start
    frame = result.stiffness_frame()
    write_csv(RESULTS_DIR / "kt" / "stiffness.csv", frame)
    ctx["stiffness"] = frame
    crossing = result.crossing()
    t_star = crossing.t_star if crossing else float("nan")
    return {
        "passed": crossing is not None and 0.84 <= t_star <= 0.95 and elapsed < 1800,
        "t_star": t_star,
        "t_star_err": crossing.error if crossing else None,
        "sweep_wall_s": elapsed,
        "runtime": result.metrics.to_dict()["summary"],
    }


def task_resilience(ctx: dict[str, Any]) -> dict[str, Any]:
    """lambda(0.2) = 0.90 +/- 0.03, lambda(0.5) = 0.75 +/- 0.04, non-increasing, d=3 -> 1."""
    frame: pd.DataFrame | None = ctx.get("stiffness")
    cached = RESULTS_DIR / "kt" / "stiffness.csv"
    if frame is None and cached.exists():
        frame = pd.read_csv(cached)
    if frame is None:
        # no KT table yet: a short L=32 table covering the noise range
        engine = SweepEngine(workers=ctx["workers"])
        base = MCParams(size=32, temperature=0.2, sweeps=_sweeps(ctx, 50_000), seed=25)
        frame = engine.sweep(base, temperature_grid(0.2, 1.2, 11)).stiffness_frame()

    table = StiffnessTable.from_frame(frame)
    lo = float(table.temperatures.min())
    sigmas = np.linspace(max(lo, 0.2), 1.2, 21)
    curve = lambda_sweep(table, sigmas, d=2, size=64, mode=LimitMode.THERMODYNAMIC)
    lams = [r.lam for r in curve]
    by_sigma = dict(zip(np.round(sigmas, 6), lams, strict=True))

    lam_02 = by_sigma.get(0.2, float("nan"))
    lam_05 = by_sigma.get(0.5, float("nan"))
    rho_05 = float(np.interp(0.5, table.temperatures, table.rho_s))
    scan = lambda_size_scan(rho_05, 0.5, 3, [4, 16, 64, 256])
    scan_lams = [r.lam for r in scan]

    checks = {
        "lambda_0.2": abs(lam_02 - 0.90) <= 0.03,
        "lambda_0.5": abs(lam_05 - 0.75) <= 0.04,
        "non_increasing": all(b <= a + 1e-12 for a, b in zip(lams, lams[1:], strict=False)),
        "zero_above_sigma_c": all(r.lam == 0.0 for r in curve if r.sigma > 0.89),
        "below_one_in_2d": max(lams) < 1.0,
        "d3_monotone_to_one": scan_lams == sorted(scan_lams) and scan_lams[-1] > 0.99,
    }
    return {
        "passed": all(checks.values()),
        "checks": checks,
        "lambda": {"sigma": sigmas.tolist(), "lambda": lams},
        "d3_scan": {"L": [4, 16, 64, 256], "lambda": scan_lams},
    }


TASKS: dict[int, tuple[str, Task]] = {
    1: ("exact", task_exact),
    2: ("low_t", task_low_t),
    3: ("gauge", task_gauge),
    4: ("kt", task_kt),
    5: ("resilience", task_resilience),
}


# ============================================================================
# Benchmark Runner
# ============================================================================

def run_single_benchmark(task_id: int, ctx: dict[str, Any]) -> dict[str, Any]:
    """Run one task, time it and export its JSON result."""
    name, fn = TASKS[task_id]
    console.rule(f"[bold]BENCHMARK {task_id}: {name}")
    console.print(f"  {fn.__doc__}")

    start = time.time()
    try:
        result = fn(ctx)
    except Exception as e:  # noqa: BLE001
        console.print_exception()
        result = {"passed": False, "error": str(e)}
    elapsed = time.time() - start

    record = {"benchmark_id": task_id, "task_name": name, "elapsed_s": round(elapsed, 2), **result}
    write_json(RESULTS_DIR / f"{name}.json", record)
    status = "[green]PASS[/green]" if record["passed"] else "[red]FAIL[/red]"
    console.print(f"  {status} in {elapsed:.1f}s\n")
    return record


def run_all_benchmarks(task_ids: list[int], workers: int, quick: bool) -> list[dict[str, Any]]:
    RESULTS_DIR.mkdir(parents=True, exist_ok=True)
    ctx: dict[str, Any] = {"workers": workers, "quick": quick}
    results = [run_single_benchmark(task_id, ctx) for task_id in task_ids]

    write_json(RESULTS_DIR / "all_benchmarks.json", build_meta(
        "benchmarks", {"tasks": task_ids, "workers": workers, "quick": quick},
        results=results,
    ))

    table = Table(title="BENCHMARK COMPARISON")
    table.add_column("Task", style="cyan")
    table.add_column("Status")
    table.add_column("Time", justify="right")
    for r in results:
        table.add_row(
            r["task_name"],
            "[green]PASS[/green]" if r["passed"] else "[red]FAIL[/red]",
            f"{r['elapsed_s']:.1f}s",
        )
    console.print(table)
    console.print(f"Results exported to: {RESULTS_DIR}/")
    return results


# ============================================================================
# CLI Entry Point
# ============================================================================

@click.command()
@click.option("--task", "-t", type=click.IntRange(1, len(TASKS)), multiple=True,
              help="Run only this task (repeatable)")
@click.option("--workers", "-j", type=int, default=1, show_default=True)
@click.option("--quick", is_flag=True, help="Shorter chains; acceptance bounds may fail")
@click.option("--log-level", default="WARNING", show_default=True)
def main(task: tuple[int, ...], workers: int, quick: bool, log_level: str) -> None:
    """rotorxy Benchmark Suite"""
    setup_logging(log_level)
    results = run_all_benchmarks(sorted(task) or sorted(TASKS), workers, quick)
    sys.exit(0 if all(r["passed"] for r in results) else 1)


if __name__ == "__main__":
    main()
