"""
von Mises phase noise on the rotors of the toric-rotor code.

Each edge rotor suffers an independent phase shift Theta_e with density
P(Theta) = exp(kappa cos Theta) / (2 pi I_0(kappa)), kappa = 1/sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel
from scipy import special

from rotorxy.core.lattice import TorusLattice
from rotorxy.core.models import NoiseModel
from rotorxy.errors import DomainError

# Below this concentration the density is uniform to double precision.
UNIFORM_KAPPA = 1e-8


def concentration(sigma: float) -> float:
    """kappa = beta = 1/sigma; raises :class:`DomainError` unless sigma > 0."""
    if not sigma > 0.0:
        raise DomainError(f"noise width sigma must be positive, got {sigma}")
    return NoiseModel(sigma=sigma).kappa


def wrap_angle(x: ArrayLike) -> NDArray[np.float64]:
    """Reduce angles to [-pi, pi)."""
    return np.asarray(np.mod(np.asarray(x, dtype=float) + math.pi, 2.0 * math.pi) - math.pi)


def von_mises_pdf(theta: ArrayLike, sigma: float) -> NDArray[np.float64]:
    """exp(kappa cos theta) / (2 pi I_0(kappa)), evaluated in scaled form."""
    kappa = concentration(sigma)
    t = np.asarray(theta, dtype=float)
    return np.asarray(np.exp(kappa * (np.cos(t) - 1.0)) / (2.0 * math.pi * special.ive(0, kappa)))


def von_mises_sample(
    rng: np.random.Generator, sigma: float, size: int | tuple[int, ...] | None = None
) -> NDArray[np.float64] | float:
    """Exact samples in (-pi, pi] by rejection from a wrapped-Cauchy envelope.

    Envelope constants (Best and Fisher):
        tau = 1 + sqrt(1 + 4 kappa^2), rho = (tau - sqrt(2 tau)) / (2 kappa),
        r = (1 + rho^2) / (2 rho).
    """
    kappa = concentration(sigma)
    shape = () if size is None else size
    count = int(np.prod(shape)) if shape != () else 1
    if kappa < UNIFORM_KAPPA:
        out = math.pi * (2.0 * rng.random(count) - 1.0)
    else:
        tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
        rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
        r = (1.0 + rho * rho) / (2.0 * rho)
        out = np.empty(count)
        pending = np.arange(count)
        while pending.size:
            u1, u2, u3 = rng.random((3, pending.size))
            z = np.cos(math.pi * u1)
            f = (1.0 + r * z) / (r + z)
            c = kappa * (r - f)
            with np.errstate(divide="ignore"):
                accept = (c * (2.0 - c) - u2 > 0.0) | (np.log(c / u2) + 1.0 - c >= 0.0)
            angles = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
            out[pending[accept]] = angles[accept]
            pending = pending[~accept]
    if size is None:
        return float(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Syndromes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Holonomies:
    """Continuous syndrome of one error: signed face sums and loop sums, wrapped to [-pi, pi)."""
    face: NDArray[np.float64]
    loop_x: float
    loop_y: float
    edge_errors: NDArray[np.float64]

    @property
    def max_face(self) -> float:
        return float(np.max(np.abs(self.face)))


def holonomies(lattice: TorusLattice, edge_errors: ArrayLike) -> Holonomies:
    """sum_{e in boundary f} eps_{e,f} Theta_e per face, and Theta summed on C_x and C_y."""
    theta = np.asarray(edge_errors, dtype=float)
    if theta.shape != (lattice.n_edges,):
        raise ValueError(f"expected {lattice.n_edges} edge phases, got {theta.shape}")
    face = wrap_angle(lattice.face_incidence.T @ theta)
    return Holonomies(
        face=face,
        loop_x=float(wrap_angle(theta[lattice.loop_x].sum())),
        loop_y=float(wrap_angle(theta[lattice.loop_y].sum())),
        edge_errors=theta,
    )


def syndrome_sample(lattice: TorusLattice, sigma: float, rng: np.random.Generator) -> Holonomies:
    """Sample one von Mises error on every edge and return its holonomies."""
    errors = np.asarray(von_mises_sample(rng, sigma, lattice.n_edges))
    return holonomies(lattice, errors)


class SyndromeStatistics(BaseModel):
    samples: int
    mean_abs_face: float
    max_abs_face: float
    fraction_above: float
    threshold: float


def syndrome_statistics(
    lattice: TorusLattice,
    sigma: float,
    rng: np.random.Generator,
    samples: int = 100,
    threshold: float = 0.8,
) -> SyndromeStatistics:
    """Face-holonomy magnitudes over repeated independent errors."""
    faces = np.stack([np.abs(syndrome_sample(lattice, sigma, rng).face) for _ in range(samples)])
    return SyndromeStatistics(
        samples=samples,
        mean_abs_face=float(faces.mean()),
        max_abs_face=float(faces.max()),
        fraction_above=float(np.mean(faces > threshold)),
        threshold=threshold,
    )
