"""
SweepEngine: runs Monte Carlo chains over a temperature grid and reduces them to
stiffness tables.

Each point is an independent chain seeded from (master seed, point index), so the result
does not depend on how points are distributed over workers. Points run in-process for
``workers=1`` and in a process pool otherwise; results are always ordered by point index.

Usage:
    engine = SweepEngine(workers=4)
    result = engine.sweep(MCParams(size=16, temperature=1.0, seed=7), temperatures)
    frame = result.stiffness_frame()
"""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import pandas as pd

from rotorxy.analysis.binning import (
    DEFAULT_BINS,
    check_bin_count,
    integrated_autocorrelation_time,
)
from rotorxy.analysis.crossing import CrossingEstimate, kt_crossing
from rotorxy.core.models import MCParams, StiffnessEstimate
from rotorxy.errors import BracketingError
from rotorxy.mc.simulation import ObservableSeries, XYSimulation
from rotorxy.mc.stiffness import energy_estimate, stiffness_boundary, stiffness_distributed
from rotorxy.observability.metrics import PointMetrics, SweepMetrics
from rotorxy.utils.config import RotorXYConfig

logger = logging.getLogger(__name__)

STIFFNESS_COLUMNS = (
    "T", "rho_s", "rho_s_err", "E_mean", "E_err", "acc_rate",
    "rho_s_boundary", "rho_s_boundary_err",
)


@dataclass
class PointResult:
    """Reduced output of one chain."""
    params: MCParams
    distributed: StiffnessEstimate
    boundary: StiffnessEstimate
    energy: tuple[float, float]
    metrics: PointMetrics
    series: ObservableSeries | None = None

    def row(self) -> dict[str, float]:
        return {
            "T": self.params.temperature,
            "rho_s": self.distributed.rho_s,
            "rho_s_err": self.distributed.error,
            "E_mean": self.energy[0],
            "E_err": self.energy[1],
            "acc_rate": self.metrics.acceptance_rate,
            "rho_s_boundary": self.boundary.rho_s,
            "rho_s_boundary_err": self.boundary.error,
        }


def analyze_series(
    series: ObservableSeries, params: MCParams, n_bins: int = DEFAULT_BINS
) -> PointResult:
    """Stiffness (both twist placements), energy and chain metrics of one series."""
    beta, size = params.beta, params.size
    metrics = PointMetrics(
        point_index=params.point_index,
        temperature=params.temperature,
        wall_time=series.wall_time,
        measurements=len(series),
        acceptance_rate=series.acceptance_rate,
        final_width=series.final_width,
        mean_cluster_size=series.mean_cluster_size,
        tau_int=integrated_autocorrelation_time(series["energy"]),
    )
    return PointResult(
        params=params,
        distributed=stiffness_distributed(series, beta, size, n_bins=n_bins),
        boundary=stiffness_boundary(series, beta, size, n_bins=n_bins),
        energy=energy_estimate(series, n_bins=n_bins),
        metrics=metrics,
    )


def run_point(
    params: MCParams, n_bins: int = DEFAULT_BINS, keep_series: bool = False
) -> PointResult:
    """Run and reduce one chain. Module-level so process pools can pickle it."""
    check_bin_count(params.n_measurements, n_bins)
    series = XYSimulation(params).run()
    result = analyze_series(series, params, n_bins=n_bins)
    if keep_series:
        result.series = series
    logger.info(
        "T=%.4f rho_s=%.5f(%.5f) E=%.3f (%.1fs)",
        params.temperature, result.distributed.rho_s, result.distributed.error,
        result.energy[0], series.wall_time,
    )
    return result


def temperature_grid(tmin: float, tmax: float, steps: int) -> list[float]:
    """``steps`` evenly spaced temperatures from tmin to tmax inclusive."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if steps == 1:
        return [float(tmin)]
    return [float(t) for t in np.linspace(tmin, tmax, steps)]


@dataclass
class SweepResult:
    points: list[PointResult]
    metrics: SweepMetrics = field(default_factory=SweepMetrics)

    def stiffness_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.row() for p in self.points], columns=list(STIFFNESS_COLUMNS))

    def crossing(self) -> CrossingEstimate | None:
        """KT crossing of the distributed-twist stiffness, or None when not bracketed."""
        frame = self.stiffness_frame()
        try:
            return kt_crossing(frame["T"], frame["rho_s"], frame["rho_s_err"])
        except BracketingError as exc:
            logger.info("No KT crossing: %s", exc)
            return None


class SweepEngine:
    """Runs a temperature sweep on a bounded worker pool."""

    def __init__(
        self,
        config: RotorXYConfig | None = None,
        workers: int | None = None,
        n_bins: int = DEFAULT_BINS,
    ) -> None:
        self._config = config or RotorXYConfig()
        self.workers = max(1, workers if workers is not None else self._config.workers)
        self.n_bins = n_bins

    def point_params(self, base: MCParams, temperatures: Sequence[float]) -> list[MCParams]:
        return [
            base.model_copy(update={"temperature": float(t), "point_index": i})
            for i, t in enumerate(temperatures)
        ]

    def sweep(self, base: MCParams, temperatures: Sequence[float]) -> SweepResult:
        """
        Run one chain per temperature.

        Args:
            base: Shared chain parameters; temperature and point index are replaced per point.
            temperatures: The grid, in point-index order.

        Returns:
            A SweepResult whose points are sorted by point index.

        Raises:
            InsufficientDataError: If a chain cannot fill the bins; raised before any chain runs.
        """
        check_bin_count(base.n_measurements, self.n_bins)
        all_params = self.point_params(base, temperatures)
        metrics = SweepMetrics()
        logger.info(
            "Sweep L=%d: %d points, %d sweeps each, %d worker(s)",
            base.size, len(all_params), base.sweeps, self.workers,
        )
        start = time.perf_counter()
        task = partial(run_point, n_bins=self.n_bins)
        if self.workers == 1 or len(all_params) == 1:
            points = [task(p) for p in all_params]
        else:
            with ProcessPoolExecutor(max_workers=min(self.workers, len(all_params))) as pool:
                points = list(pool.map(task, all_params))
        points.sort(key=lambda p: p.params.point_index)
        for p in points:
            metrics.record_point(p.metrics)
        metrics.mark_complete()
        logger.info("Sweep finished in %.1fs", time.perf_counter() - start)
        return SweepResult(points=points, metrics=metrics)
