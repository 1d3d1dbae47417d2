"""
Relative gate fidelity r(phi) = F_phi / F = Z_phi / Z of the noisy toric-rotor code.

A noise width sigma corresponds to an XY model at T = sigma (beta = 1/sigma); the
fidelity susceptibility is chi_F = <K^2>, equal to rho_s / T on an L x L torus.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel

from rotorxy.core.models import DualMethod, DualSumSpec, FidelityCurve, PartitionResult
from rotorxy.exact.dual import evaluate
from rotorxy.exact.transfer import DEFAULT_MAX_STATES
from rotorxy.rotor.noise import concentration, wrap_angle


class FidelityPoint(BaseModel):
    phi: float
    r: float
    ln_r: float
    chi_f: float


def exact_at_noise(
    size: int,
    sigma: float,
    *,
    twist: float = 0.0,
    method: DualMethod = DualMethod.TRANSFER,
    cutoff: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> PartitionResult:
    """Exact evaluation of the XY model dual to noise width ``sigma``."""
    spec = DualSumSpec(
        size=size, beta=concentration(sigma), cutoff=cutoff, twist=twist, method=method
    )
    return evaluate(spec, max_states=max_states)


def rel_fidelity(
    size: int,
    sigma: float,
    phi: float,
    *,
    method: DualMethod = DualMethod.TRANSFER,
    cutoff: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> FidelityPoint:
    """r(phi) and chi_F from one twisted exact evaluation."""
    twist = float(wrap_angle(phi))
    result = exact_at_noise(
        size, sigma, twist=twist, method=method, cutoff=cutoff, max_states=max_states
    )
    ln_r = result.ln_z_phi - result.ln_z
    assert result.k2_mean is not None
    return FidelityPoint(phi=phi, r=math.exp(ln_r), ln_r=ln_r, chi_f=result.k2_mean)


def fidelity_curve(
    size: int,
    sigma: float,
    phis: ArrayLike,
    *,
    method: DualMethod = DualMethod.TRANSFER,
    cutoff: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> FidelityCurve:
    """ln r on a grid of twists from a single winding-resolved evaluation."""
    result = exact_at_noise(size, sigma, method=method, cutoff=cutoff, max_states=max_states)
    grid = [float(p) for p in np.asarray(phis, dtype=float)]
    assert result.k2_mean is not None
    return FidelityCurve(
        size=size,
        sigma=sigma,
        phis=grid,
        ln_r=[result.ln_z_at(p) - result.ln_z for p in grid],
        chi_f=result.k2_mean,
    )


def gaussian_law_deviation(curve: FidelityCurve) -> list[float]:
    """|ln r + chi_F phi^2 / 2| / |ln r| for every nonzero phi of the curve."""
    out = []
    for phi, ln_r in zip(curve.phis, curve.ln_r, strict=True):
        if phi == 0.0 or ln_r == 0.0:
            continue
        out.append(abs(ln_r + curve.chi_f * phi * phi / 2.0) / abs(ln_r))
    return out


def fidelity_stiffness(curve: FidelityCurve, max_phi: float = 0.3) -> float:
    """rho_s = -2 T d(ln r)/d(phi^2), least squares through the origin for |phi| <= max_phi."""
    phi = np.asarray(curve.phis)
    ln_r = np.asarray(curve.ln_r)
    mask = (np.abs(phi) <= max_phi) & (phi != 0.0)
    x = phi[mask] ** 2
    if x.size == 0:
        raise ValueError(f"no nonzero twist with |phi| <= {max_phi} in the curve")
    slope = float(np.sum(x * ln_r[mask]) / np.sum(x * x))
    return -2.0 * curve.sigma * slope
