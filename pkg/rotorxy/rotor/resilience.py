"""
Resilience order parameter lambda = <cos phi> of the noisy toric-rotor code.

The weight over logical twists is either the Gaussian law
exp(-rho_s L^{d-2} phi^2 / (2T)) fed with a measured stiffness, or the exact ratio
r(phi) = Z_phi / Z on small tori.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from rotorxy.analysis.crossing import monotone_interpolator
from rotorxy.core.models import (
    DualMethod,
    LimitMode,
    ResilienceMode,
    ResilienceResult,
)
from rotorxy.errors import BracketingError, DomainError
from rotorxy.exact.transfer import DEFAULT_MAX_STATES
from rotorxy.rotor.fidelity import exact_at_noise

logger = logging.getLogger(__name__)

SIGMA_C = 0.89
DEFAULT_PHI_GRID = 256


def lambda_gaussian(
    rho_s: float,
    temperature: float,
    d: int = 2,
    size: int = 1,
    *,
    epsabs: float = 1e-8,
) -> ResilienceResult:
    """<cos phi> over [-pi, pi] with weight exp(-rho_s L^{d-2} phi^2 / (2T))."""
    if rho_s < 0.0:
        raise DomainError(f"stiffness must be non-negative, got {rho_s}")
    if temperature <= 0.0:
        raise DomainError(f"temperature must be positive, got {temperature}")
    if d < 2 or size < 1:
        raise DomainError(f"need d >= 2 and L >= 1, got d={d}, L={size}")

    a = rho_s * float(size) ** (d - 2) / temperature
    if a == 0.0:
        return ResilienceResult(
            lam=0.0, sigma=temperature, rho_s=rho_s, d=d, size=size,
            normalization=2.0 * math.pi,
        )
    # weight is even: integrate [0, pi] and split where the Gaussian has decayed
    knee = [min(math.pi / 2.0, 5.0 / math.sqrt(a))]
    opts = {"epsabs": epsabs * 1e-2, "epsrel": 1e-12, "limit": 200, "points": knee}

    def weight(p: float) -> float:
        return math.exp(-0.5 * a * p * p)

    num, _ = integrate.quad(lambda p: math.cos(p) * weight(p), 0.0, math.pi, **opts)
    den, _ = integrate.quad(weight, 0.0, math.pi, **opts)
    return ResilienceResult(
        lam=min(1.0, max(-1.0, num / den)),
        sigma=temperature,
        rho_s=rho_s,
        d=d,
        size=size,
        normalization=2.0 * den,
    )


def lambda_exact(
    size: int,
    sigma: float,
    *,
    grid: int = DEFAULT_PHI_GRID,
    method: DualMethod = DualMethod.TRANSFER,
    cutoff: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> ResilienceResult:
    """<cos phi> with the exact weight r(phi), periodic trapezoid rule on ``grid`` points."""
    if grid < 64:
        raise DomainError(f"twist grid needs at least 64 points, got {grid}")
    result = exact_at_noise(size, sigma, method=method, cutoff=cutoff, max_states=max_states)
    phis = -math.pi + 2.0 * math.pi * np.arange(grid) / grid
    k = np.asarray(result.winding, dtype=float)
    lw = np.asarray(result.winding_log_weight)
    p = np.exp(lw - lw.max())
    r = np.cos(np.outer(phis, k)) @ p / p.sum()
    lam = float(np.sum(np.cos(phis) * r) / np.sum(r))
    assert result.k2_mean is not None
    return ResilienceResult(
        lam=min(1.0, max(-1.0, lam)),
        sigma=sigma,
        rho_s=sigma * result.k2_mean,
        d=2,
        size=size,
        mode=ResilienceMode.EXACT,
        normalization=float(2.0 * math.pi * r.mean()),
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StiffnessTable:
    """rho_s(T) with errors, as written to ``stiffness.csv``."""
    temperatures: NDArray[np.float64]
    rho_s: NDArray[np.float64]
    rho_err: NDArray[np.float64]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> StiffnessTable:
        frame = frame.sort_values("T")
        err = frame["rho_s_err"] if "rho_s_err" in frame else np.zeros(len(frame))
        return cls(
            temperatures=frame["T"].to_numpy(dtype=float),
            rho_s=frame["rho_s"].to_numpy(dtype=float),
            rho_err=np.asarray(err, dtype=float),
        )

    @classmethod
    def from_csv(cls, path: str | Path) -> StiffnessTable:
        return cls.from_frame(pd.read_csv(path))

    def covers(self, t: float) -> bool:
        lo, hi = float(self.temperatures.min()), float(self.temperatures.max())
        return lo - 1e-12 <= t <= hi + 1e-12


def lambda_sweep(
    table: StiffnessTable,
    sigmas: ArrayLike,
    *,
    d: int = 2,
    size: int = 64,
    mode: LimitMode = LimitMode.FINITE,
    sigma_c: float = SIGMA_C,
    epsabs: float = 1e-8,
) -> list[ResilienceResult]:
    """lambda(sigma) from a stiffness table read at T = sigma.

    In thermodynamic mode rho_s is zero above ``sigma_c`` and those points need no table
    coverage. Errors come from re-evaluating at rho_s +/- err. ``epsabs`` is the absolute
    tolerance of each quadrature.
    """
    grid = np.asarray(sigmas, dtype=float)
    rho_curve = monotone_interpolator(table.temperatures, table.rho_s)
    results: list[ResilienceResult] = []
    for sigma in grid:
        if mode is LimitMode.THERMODYNAMIC and sigma > sigma_c:
            results.append(lambda_gaussian(0.0, float(sigma), d, size, epsabs=epsabs))
            continue
        if not table.covers(float(sigma)):
            raise BracketingError(
                f"sigma={sigma:.4g} outside the stiffness table range "
                f"[{table.temperatures.min():.4g}, {table.temperatures.max():.4g}]"
            )
        rho_raw = float(rho_curve(min(max(sigma, table.temperatures[0]), table.temperatures[-1])))
        rho = max(rho_raw, 0.0)
        if rho_raw < 0.0:
            logger.warning("Clamped negative stiffness %.3g at sigma=%.4g to 0", rho_raw, sigma)
        err = float(np.interp(sigma, table.temperatures, table.rho_err))
        central = lambda_gaussian(rho, float(sigma), d, size, epsabs=epsabs)
        upper = lambda_gaussian(rho + err, float(sigma), d, size, epsabs=epsabs).lam
        lower = lambda_gaussian(max(rho - err, 0.0), float(sigma), d, size, epsabs=epsabs).lam
        results.append(central.model_copy(update={"error": abs(upper - lower) / 2.0}))
    return results


def lambda_size_scan(
    rho_s: float, temperature: float, d: int, sizes: ArrayLike
) -> list[ResilienceResult]:
    """lambda versus L at fixed stiffness; for d > 2 it approaches 1 as L grows."""
    return [lambda_gaussian(rho_s, temperature, d, int(L)) for L in np.asarray(sizes)]
