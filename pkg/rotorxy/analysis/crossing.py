"""KT crossing of the stiffness curve with the universal-jump line rho_s = 2T/pi."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from rotorxy.errors import BracketingError

logger = logging.getLogger(__name__)

JUMP_SLOPE = 2.0 / math.pi


class CrossingEstimate(BaseModel):
    t_star: float
    error: float = 0.0


def monotone_interpolator(x: ArrayLike, y: ArrayLike) -> PchipInterpolator:
    """Shape-preserving cubic interpolant through (x, y) after sorting by x."""
    xs = np.asarray(x, dtype=float)
    order = np.argsort(xs)
    return PchipInterpolator(xs[order], np.asarray(y, dtype=float)[order], extrapolate=False)


def _root(temps: NDArray[np.float64], rho: NDArray[np.float64], slope: float) -> float:
    curve = monotone_interpolator(temps, rho)
    order = np.argsort(temps)
    ts = temps[order]
    gap = rho[order] - slope * ts
    for i in range(ts.size):
        if gap[i] == 0.0:
            return float(ts[i])
        if i + 1 < ts.size and gap[i] > 0.0 > gap[i + 1]:
            return float(brentq(lambda t: float(curve(t)) - slope * t, ts[i], ts[i + 1]))
    raise BracketingError("stiffness table does not cross the line rho_s = slope * T")


def kt_crossing(
    temperatures: ArrayLike,
    rho_s: ArrayLike,
    rho_err: ArrayLike | None = None,
    slope: float = JUMP_SLOPE,
) -> CrossingEstimate:
    """T* where the monotone interpolant of rho_s(T) meets slope * T.

    The error is half the spread of the crossings of rho_s +/- err; bands that do not
    cross contribute nothing.
    """
    temps = np.asarray(temperatures, dtype=float)
    rho = np.asarray(rho_s, dtype=float)
    if temps.size < 2 or temps.shape != rho.shape:
        raise BracketingError("need at least two (T, rho_s) points of matching shape")
    t_star = _root(temps, rho, slope)

    error = 0.0
    if rho_err is not None:
        err = np.asarray(rho_err, dtype=float)
        band = []
        for shifted in (rho + err, rho - err):
            try:
                band.append(_root(temps, shifted, slope))
            except BracketingError:
                logger.debug("Error band does not cross the jump line")
        if len(band) == 2:
            error = abs(band[0] - band[1]) / 2.0
        elif band:
            error = abs(band[0] - t_star)
    return CrossingEstimate(t_star=t_star, error=error)
