"""Winding-resolved sums produced by the exact evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class WindingSums:
    """Sum of current weights grouped by the cut winding K.

    ``weight[i]`` is the total of prod_e I_{k_e}/I_0 over configurations with
    K = ``winding[i]``; ``energy[i]`` (optional) is the same total weighted by
    sum_e I'_{k_e}/I_{k_e}.
    """
    winding: NDArray[np.int64]
    weight: NDArray[np.float64]
    energy: NDArray[np.float64] | None = None

    @classmethod
    def from_mapping(
        cls, weights: dict[int, float], energies: dict[int, float] | None = None
    ) -> WindingSums:
        keys = sorted(k for k, w in weights.items() if w > 0.0)
        return cls(
            winding=np.array(keys, dtype=np.int64),
            weight=np.array([weights[k] for k in keys], dtype=float),
            energy=None if energies is None else np.array([energies[k] for k in keys], dtype=float),
        )

    @property
    def total(self) -> float:
        return float(self.weight.sum())

    def ln_total(self) -> float:
        return math.log(self.total)

    def ln_twisted(self, phi: float) -> float:
        """ln of sum_K w_K cos(phi K)."""
        return math.log(float(np.sum(self.weight * np.cos(phi * self.winding))))

    def moment(self, power: int) -> float:
        return float(np.sum(self.weight * self.winding.astype(float) ** power) / self.total)

    def mean_log_derivative(self) -> float | None:
        """< sum_e I'_{k_e}/I_{k_e} > = d ln Z / d beta."""
        if self.energy is None:
            return None
        return float(self.energy.sum() / self.total)
