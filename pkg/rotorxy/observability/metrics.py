"""
SweepMetrics: run statistics of Monte Carlo sweeps.

Collects per-point chain statistics:
- wall time and measurement count
- Metropolis acceptance rate and the frozen proposal width
- mean Wolff cluster size
- integrated autocorrelation time of the energy

Exported as a dict under "runtime" in ``meta.json``; none of it enters the CSV outputs.
"""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Any

logger = logging.getLogger(__name__)


def _clean(value: float, digits: int = 4) -> float | None:
    return None if math.isnan(value) else round(value, digits)


@dataclass
class PointMetrics:
    """Statistics of the chain at one temperature."""
    point_index: int
    temperature: float
    wall_time: float = 0.0
    measurements: int = 0
    acceptance_rate: float = float("nan")
    final_width: float = float("nan")
    mean_cluster_size: float = float("nan")
    tau_int: float = float("nan")

    @property
    def measurements_per_second(self) -> float:
        return self.measurements / self.wall_time if self.wall_time > 0 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "point_index": self.point_index,
            "temperature": self.temperature,
            "wall_time_s": round(self.wall_time, 3),
            "measurements": self.measurements,
            "measurements_per_s": round(self.measurements_per_second, 1),
            "acceptance_rate": _clean(self.acceptance_rate),
            "final_width": _clean(self.final_width),
            "mean_cluster_size": _clean(self.mean_cluster_size, 2),
            "tau_int": _clean(self.tau_int, 2),
        }


@dataclass
class SweepMetrics:
    """
    Collector for the points of one sweep.

    Usage:
        metrics = SweepMetrics()
        metrics.record_point(PointMetrics(point_index=0, temperature=0.8, ...))
        report = metrics.to_dict()
    """
    points: dict[int, PointMetrics] = field(default_factory=dict)
    started: float = field(default_factory=time.time)
    finished: float | None = None

    def record_point(self, point: PointMetrics) -> None:
        self.points[point.point_index] = point
        logger.debug(
            "Point %d: T=%.4f %.1fs acc=%.3f tau=%.1f",
            point.point_index, point.temperature, point.wall_time,
            point.acceptance_rate, point.tau_int,
        )

    def mark_complete(self) -> None:
        self.finished = time.time()

    @property
    def elapsed_time(self) -> float:
        end = self.finished or time.time()
        return end - self.started

    @property
    def worst_tau(self) -> float:
        taus = [p.tau_int for p in self.points.values() if not math.isnan(p.tau_int)]
        return max(taus) if taus else float("nan")

    def to_dict(self) -> dict[str, Any]:
        walls = [p.wall_time for p in self.points.values()]
        return {
            "summary": {
                "elapsed_time_s": round(self.elapsed_time, 2),
                "points": len(self.points),
                "cpu_time_s": round(sum(walls), 2),
                "mean_point_time_s": round(statistics.mean(walls), 3) if walls else 0.0,
                "worst_tau_int": _clean(self.worst_tau, 2),
            },
            "points": [self.points[i].to_dict() for i in sorted(self.points)],
        }

    def summary_text(self) -> str:
        d = self.to_dict()
        s = d["summary"]
        lines = [
            "=== Sweep Metrics ===",
            f"Elapsed Time:   {s['elapsed_time_s']:.1f}s",
            f"Points:         {s['points']}",
            f"CPU Time:       {s['cpu_time_s']:.1f}s",
            f"Worst tau_int:  {s['worst_tau_int']}",
        ]
        for p in d["points"]:
            lines.append(
                f"  T={p['temperature']:.4f}: {p['wall_time_s']:.1f}s, "
                f"acc {p['acceptance_rate']}, tau {p['tau_int']}"
            )
        return "\n".join(lines)
