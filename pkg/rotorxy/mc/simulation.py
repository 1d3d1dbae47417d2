"""
XY-model Markov chains on the torus.

:class:`XYSimulation` owns one chain: spin angles, the generator seeded from
(master seed, point index), and the adaptive proposal width, which is tuned only during
thermalization and frozen for measurements.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from rotorxy.core.lattice import TorusLattice, build_torus
from rotorxy.core.models import Algorithm, MCParams, StartMode
from rotorxy.errors import DomainError
from rotorxy.mc import kernels

logger = logging.getLogger(__name__)

SERIES_COLUMNS = (
    "sweep", "energy", "xbond_cos", "xbond_sin", "cut_cos", "cut_sin", "mag_x", "mag_y",
)
ADAPT_WINDOW = 100
TARGET_ACCEPTANCE = (0.4, 0.6)


def point_rng(seed: int, point_index: int) -> np.random.Generator:
    """Independent stream for one sweep point, derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point_index,)))


# ---------------------------------------------------------------------------
# Spin configurations
# ---------------------------------------------------------------------------


@dataclass
class SpinConfig:
    """One angle per vertex, kept reduced to [0, 2 pi)."""
    lattice: TorusLattice
    theta: NDArray[np.float64]

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.shape != (self.lattice.n_vertices,):
            raise ValueError(f"expected {self.lattice.n_vertices} angles, got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("spin angles must be finite")
        self.theta = np.ascontiguousarray(np.mod(theta, 2.0 * math.pi))

    @classmethod
    def cold(cls, lattice: TorusLattice) -> SpinConfig:
        return cls(lattice, np.zeros(lattice.n_vertices))

    @classmethod
    def hot(cls, lattice: TorusLattice, rng: np.random.Generator) -> SpinConfig:
        return cls(lattice, 2.0 * math.pi * rng.random(lattice.n_vertices))

    def bond_angles(self) -> NDArray[np.float64]:
        """Theta_e = theta_start - theta_end per edge."""
        return np.asarray(self.theta[self.lattice.edge_start] - self.theta[self.lattice.edge_end])

    def energy(self) -> float:
        return -float(np.sum(np.cos(self.bond_angles())))

    def magnetization(self) -> tuple[float, float]:
        return float(np.sum(np.cos(self.theta))), float(np.sum(np.sin(self.theta)))

    def rotated(self, angle: float) -> SpinConfig:
        return SpinConfig(self.lattice, self.theta + angle)

    def observables(self) -> tuple[float, ...]:
        lat = self.lattice
        return tuple(
            float(v)
            for v in kernels.measure(
                self.theta, lat.edge_start, lat.edge_end, lat.x_edges, lat.cut_ybar
            )
        )


def wolff_update(config: SpinConfig, beta: float, rng: np.random.Generator) -> int:
    """Reflect one embedded cluster of ``config`` in place; returns the cluster size."""
    if beta <= 0.0:
        raise DomainError(f"Wolff update needs beta > 0, got {beta}")
    lat = config.lattice
    members, in_cluster = kernels.empty_cluster_buffers(lat.n_vertices)
    return int(kernels.wolff_cluster(config.theta, lat.neighbors, beta, rng, members, in_cluster))


# ---------------------------------------------------------------------------
# Observable series
# ---------------------------------------------------------------------------


@dataclass
class ObservableSeries:
    """Per-measurement records of one chain, plus chain statistics."""
    columns: dict[str, NDArray[np.float64]]
    params: MCParams | None = None
    acceptance_rate: float = float("nan")
    mean_cluster_size: float = float("nan")
    final_width: float = float("nan")
    wall_time: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.columns["energy"].shape[0])

    def __getitem__(self, name: str) -> NDArray[np.float64]:
        return self.columns[name]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: self.columns[name] for name in SERIES_COLUMNS})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, params: MCParams | None = None) -> ObservableSeries:
        missing = [c for c in SERIES_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"series is missing columns: {', '.join(missing)}")
        return cls(
            columns={c: frame[c].to_numpy(dtype=float) for c in SERIES_COLUMNS},
            params=params,
        )


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


class XYSimulation:
    """A single Markov chain of the XY model at fixed temperature."""

    def __init__(self, params: MCParams, lattice: TorusLattice | None = None) -> None:
        self.params = params
        self.lattice = lattice or build_torus(params.size)
        self.rng = point_rng(params.seed, params.point_index)
        if params.resolved_start is StartMode.COLD:
            self.spins = SpinConfig.cold(self.lattice)
        else:
            self.spins = SpinConfig.hot(self.lattice, self.rng)
        self.width = params.width
        self._members, self._in_cluster = kernels.empty_cluster_buffers(self.lattice.n_vertices)
        self._accepted = 0
        self._proposed = 0
        self._flipped = 0
        self._clusters = 0

    @property
    def beta(self) -> float:
        return self.params.beta

    def measure(self) -> tuple[float, ...]:
        """(E, x-bond cos/sin sums, seam cos/sin sums, m_x, m_y) of the current state."""
        return self.spins.observables()

    def sweep(self) -> None:
        theta = self.spins.theta
        nbrs = self.lattice.neighbors
        if self.params.algorithm is Algorithm.WOLFF:
            flipped, clusters = kernels.wolff_sweep(
                theta, nbrs, self.beta, self.rng, self._members, self._in_cluster
            )
            self._flipped += int(flipped)
            self._clusters += int(clusters)
            return
        accepted = kernels.metropolis_sweep(theta, nbrs, self.beta, self.width, self.rng)
        self._accepted += int(accepted)
        self._proposed += theta.shape[0]
        if self.params.algorithm is Algorithm.METROPOLIS_OVERRELAX:
            kernels.overrelax_sweep(theta, nbrs)

    def _reset_counters(self) -> None:
        self._accepted = self._proposed = self._flipped = self._clusters = 0

    def thermalize(self) -> None:
        """Equilibrate, tuning the proposal width toward 40-60% acceptance."""
        low, high = TARGET_ACCEPTANCE
        for s in range(1, self.params.resolved_therm + 1):
            self.sweep()
            if s % ADAPT_WINDOW == 0 and self._proposed:
                rate = self._accepted / self._proposed
                if rate < low:
                    self.width *= 0.8
                elif rate > high:
                    self.width = min(math.pi, self.width * 1.25)
                self._accepted = self._proposed = 0
        logger.debug("Thermalized T=%.4f width=%.3f", self.params.temperature, self.width)
        self._reset_counters()

    def run(self) -> ObservableSeries:
        """Thermalize, then record every ``stride``-th of ``sweeps`` sweeps."""
        start = time.perf_counter()
        self.thermalize()
        n_meas = self.params.n_measurements
        rows = np.empty((n_meas, len(SERIES_COLUMNS)))
        row = 0
        for s in range(1, self.params.sweeps + 1):
            self.sweep()
            if s % self.params.stride == 0 and row < n_meas:
                rows[row, 0] = s
                rows[row, 1:] = self.measure()
                row += 1
        columns = {name: rows[:row, j].copy() for j, name in enumerate(SERIES_COLUMNS)}
        elapsed = time.perf_counter() - start
        series = ObservableSeries(
            columns=columns,
            params=self.params,
            acceptance_rate=self._accepted / self._proposed if self._proposed else float("nan"),
            mean_cluster_size=self._flipped / self._clusters if self._clusters else float("nan"),
            final_width=self.width,
            wall_time=elapsed,
        )
        logger.debug(
            "Chain L=%d T=%.4f: %d measurements in %.1fs",
            self.params.size, self.params.temperature, row, elapsed,
        )
        return series


def run(params: MCParams) -> ObservableSeries:
    """Run one chain; identical (params, seed) give identical series."""
    return XYSimulation(params).run()
