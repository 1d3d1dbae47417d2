"""Modified Bessel functions of the first kind, integer order, via ``scipy.special``."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from rotorxy.errors import DomainError


def _check(k: ArrayLike, x: float) -> None:
    if x < 0:
        raise DomainError(f"Bessel argument must be non-negative, got {x}")
    if np.any(np.asarray(k) < 0):
        raise DomainError("Bessel order must be non-negative")


def bessel_i(k: int, x: float) -> float:
    """I_k(x). Overflows to inf for large x; use :func:`log_bessel_i` there."""
    _check(k, x)
    return float(special.iv(k, x))


def log_bessel_i(k: int, x: float) -> float:
    """ln I_k(x), stable for large x (exponentially scaled evaluation)."""
    _check(k, x)
    scaled = float(special.ive(k, x))
    if scaled == 0.0:
        return float("-inf")
    return float(np.log(scaled) + x)


def bessel_ratio_table(beta: float, kmax: int) -> NDArray[np.float64]:
    """r(k) = I_|k|(beta) / I_0(beta) for k = -kmax..kmax (index k + kmax).

    At beta = 0 this is the Kronecker delta at k = 0.
    """
    _check(0, beta)
    orders = np.abs(np.arange(-kmax, kmax + 1))
    if beta == 0.0:
        return (orders == 0).astype(float)
    return np.asarray(special.ive(orders, beta) / special.ive(0, beta), dtype=float)


def log_derivative_table(beta: float, kmax: int) -> NDArray[np.float64]:
    """g(k) = I_k'(beta) / I_k(beta) = (I_{k-1} + I_{k+1}) / (2 I_k) for k = -kmax..kmax.

    Entries whose I_k vanishes (only at beta = 0) are set to 0; they carry zero weight.
    """
    ratios = bessel_ratio_table(beta, kmax + 1)
    mid = ratios[1:-1]
    neighbours = 0.5 * (ratios[:-2] + ratios[2:])
    out = np.zeros_like(mid)
    np.divide(neighbours, mid, out=out, where=mid > 0)
    return out
