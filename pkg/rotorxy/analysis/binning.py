"""
Binning, autocorrelation and jackknife error analysis for Monte Carlo time series.

Errors of nonlinear estimators (the stiffness combines a mean and a variance) are taken
from a leave-one-bin-out jackknife over bins that are long compared with the integrated
autocorrelation time.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rotorxy.errors import InsufficientDataError

logger = logging.getLogger(__name__)

DEFAULT_BINS = 50
MIN_BINS = 10
WINDOW_FACTOR = 6.0

Statistic = Callable[[NDArray[np.float64]], float]


@dataclass(frozen=True)
class BinnedSeries:
    """Bin means (n_bins x n_columns) with the bin length and the largest tau_int seen."""
    means: NDArray[np.float64]
    bin_size: int
    tau_int: float

    @property
    def n_bins(self) -> int:
        return int(self.means.shape[0])

    @property
    def well_separated(self) -> bool:
        return self.bin_size >= 2.0 * self.tau_int


def autocorrelation(x: ArrayLike) -> NDArray[np.float64]:
    """Normalized autocorrelation function rho(t), t = 0..n-1, by FFT."""
    data = np.asarray(x, dtype=float)
    n = data.size
    centered = data - data.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acf = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    if acf[0] <= 0.0:
        return np.zeros(n)
    return np.asarray(acf / acf[0])


def integrated_autocorrelation_time(x: ArrayLike, window_factor: float = WINDOW_FACTOR) -> float:
    """tau_int = 1/2 + sum_{t=1}^{W} rho(t) with the smallest window W >= c * tau_int(W)."""
    rho = autocorrelation(x)
    if rho.size < 2 or rho[0] == 0.0:
        return 0.5
    tau = 0.5 + np.cumsum(rho[1:])
    windows = np.arange(1, rho.size)
    ok = np.flatnonzero(windows >= window_factor * tau)
    return float(tau[ok[0]] if ok.size else tau[-1])


def check_bin_count(n: int, n_bins: int) -> None:
    """Raise unless ``n`` measurements can fill ``n_bins`` bins of at least one each."""
    if n_bins < MIN_BINS:
        raise InsufficientDataError(f"at least {MIN_BINS} bins required, got {n_bins}")
    if n < n_bins:
        raise InsufficientDataError(f"{n} measurements cannot fill {n_bins} bins")


def bin_series(data: ArrayLike, n_bins: int = DEFAULT_BINS) -> BinnedSeries:
    """Split a series (n,) or (n, k) into ``n_bins`` equal bins, dropping the oldest remainder."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    n = arr.shape[0]
    if n == 0:
        raise InsufficientDataError("cannot bin an empty series")
    check_bin_count(n, n_bins)
    bin_size = n // n_bins
    used = arr[n - n_bins * bin_size:]
    means = used.reshape(n_bins, bin_size, arr.shape[1]).mean(axis=1)
    tau = max(integrated_autocorrelation_time(arr[:, j]) for j in range(arr.shape[1]))
    binned = BinnedSeries(means=means, bin_size=bin_size, tau_int=tau)
    if not binned.well_separated:
        logger.warning(
            "Bin size %d is below 2 x tau_int = %.1f; errors are underestimated",
            bin_size, 2.0 * tau,
        )
    return binned


def jackknife(
    bins: BinnedSeries | ArrayLike, statistic: Statistic | None = None
) -> tuple[float, float]:
    """Leave-one-bin-out jackknife of ``statistic`` applied to column means.

    Returns the full-sample estimate and its standard error. The default statistic is the
    mean of the first column.
    """
    means = bins.means if isinstance(bins, BinnedSeries) else np.asarray(bins, dtype=float)
    if means.ndim == 1:
        means = means[:, None]
    n = means.shape[0]
    if n < MIN_BINS:
        raise InsufficientDataError(f"jackknife needs at least {MIN_BINS} bins, got {n}")
    stat: Statistic = statistic if statistic is not None else (lambda m: float(m[0]))
    full = stat(means.mean(axis=0))
    leave_out = (means.sum(axis=0)[None, :] - means) / (n - 1)
    estimates = np.array([stat(row) for row in leave_out])
    spread = estimates - estimates.mean()
    error = float(np.sqrt((n - 1) / n * np.sum(spread * spread)))
    return float(full), error


def binning_curve(x: ArrayLike, max_level: int | None = None) -> list[tuple[int, float]]:
    """Naive standard error of the mean versus bin size, doubling the bin size per level."""
    data = np.asarray(x, dtype=float)
    levels: list[tuple[int, float]] = []
    size = 1
    level = 0
    while data.size >= 2 * MIN_BINS and (max_level is None or level <= max_level):
        levels.append((size, float(data.std(ddof=1) / np.sqrt(data.size))))
        usable = data.size - data.size % 2
        data = 0.5 * (data[0:usable:2] + data[1:usable:2])
        size *= 2
        level += 1
    return levels
