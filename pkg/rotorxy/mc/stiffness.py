"""Helicity-modulus estimators from measured bond sums."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from rotorxy.analysis.binning import DEFAULT_BINS, bin_series, jackknife
from rotorxy.core.models import EstimatorKind, StiffnessEstimate
from rotorxy.errors import InsufficientDataError
from rotorxy.mc.simulation import ObservableSeries


def _estimate(
    cos_sum: NDArray[np.float64],
    sin_sum: NDArray[np.float64],
    beta: float,
    scale: float,
    kind: EstimatorKind,
    n_bins: int,
) -> StiffnessEstimate:
    if cos_sum.size == 0:
        raise InsufficientDataError("stiffness estimate needs a non-empty series")
    binned = bin_series(np.column_stack([cos_sum, sin_sum, sin_sum * sin_sum]), n_bins=n_bins)

    def rho(m: NDArray[np.float64]) -> float:
        # the measured <sin> is subtracted rather than assumed zero
        return float(scale * (m[0] - beta * (m[2] - m[1] * m[1])))

    value, error = jackknife(binned, rho)
    means = binned.means.mean(axis=0)
    return StiffnessEstimate(
        rho_s=value,
        error=error,
        kind=kind,
        e_dir=float(means[0]),
        i_dir=float(means[1]),
        i_dir2=float(means[2]),
        n_bins=binned.n_bins,
        bin_size=binned.bin_size,
    )


def stiffness_distributed(
    series: ObservableSeries, beta: float, size: int, n_bins: int = DEFAULT_BINS
) -> StiffnessEstimate:
    """rho_s = (1/N) [<sum_x cos> - beta Var(sum_x sin)], twist spread over all x-bonds."""
    return _estimate(
        series["xbond_cos"], series["xbond_sin"], beta, 1.0 / (size * size),
        EstimatorKind.DISTRIBUTED, n_bins,
    )


def stiffness_boundary(
    series: ObservableSeries, beta: float, size: int, d: int = 2, n_bins: int = DEFAULT_BINS
) -> StiffnessEstimate:
    """rho_s = [<sum_B cos> - beta Var(sum_B sin)] L^{2-d}, twist concentrated on the seam."""
    return _estimate(
        series["cut_cos"], series["cut_sin"], beta, float(size) ** (2 - d),
        EstimatorKind.BOUNDARY, n_bins,
    )


def energy_estimate(series: ObservableSeries, n_bins: int = DEFAULT_BINS) -> tuple[float, float]:
    """Mean total energy and its binned error."""
    if len(series) == 0:
        raise InsufficientDataError("energy estimate needs a non-empty series")
    return jackknife(bin_series(series["energy"], n_bins=n_bins))
