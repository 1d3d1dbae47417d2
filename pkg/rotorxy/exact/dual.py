"""
Exact partition functions of the XY model in the integer-current representation.

Expanding every bond weight in characters, e^{beta cos Theta} = sum_k I_k(beta) e^{ik Theta},
and integrating the angles leaves divergence-free integer currents k_e, parametrized by
face heights (reference face pinned) and two windings:

    Z_phi = sum_{n, m, m'} prod_e I_{k_e}(beta) cos(phi K),   K = sum_{e in seam} k_e.

Two evaluators produce the same sum: a contraction of the face-height factor graph over
the box |n_f|, |m|, |m'| <= Q (``enumerate``, L <= 3) and the column transfer matrix
over currents |k_e| <= Q (``transfer``, L <= 5). The cutoff is raised until ln Z moves
by less than the tolerance between Q-1 and Q.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy import special

from rotorxy.core.lattice import CurrentConfig, TorusLattice, build_torus, currents_from_heights
from rotorxy.core.models import DualMethod, DualSumSpec, PartitionResult
from rotorxy.errors import StateSpaceError
from rotorxy.exact.bessel import bessel_ratio_table, log_bessel_i, log_derivative_table
from rotorxy.exact.quadrature import quadrature_moments
from rotorxy.exact.transfer import DEFAULT_MAX_STATES, max_cutoff, transfer_sums
from rotorxy.exact.windings import WindingSums

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
ENUMERATE_MAX_CUTOFF = 12

SumsFn = Callable[[int, float, int, bool], WindingSums]


# ---------------------------------------------------------------------------
# Brute-force term stream
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurrentTerm:
    """One term of the dual sum: a current configuration and its weight prod_e I_k/I_0."""
    config: CurrentConfig
    weight: float


def iter_current_terms(lattice: TorusLattice, beta: float, cutoff: int) -> Iterator[CurrentTerm]:
    """Every (heights, m, m') in the box |.| <= cutoff with its weight, in lexicographic order.

    Exponential in the number of faces; meant for cross-checks on L = 2.
    """
    span = 3 * cutoff
    ratios = bessel_ratio_table(beta, span)
    box = range(-cutoff, cutoff + 1)
    for heights in itertools.product(box, repeat=lattice.n_faces - 1):
        for m in box:
            for m_prime in box:
                cfg = currents_from_heights(lattice, list(heights), m, m_prime)
                yield CurrentTerm(cfg, float(np.prod(ratios[cfg.currents + span])))


# ---------------------------------------------------------------------------
# Height-box contraction
# ---------------------------------------------------------------------------


class _HeightNetwork:
    """Face-height factor graph of one torus; one einsum per winding pair (m, m')."""

    def __init__(self, lattice: TorusLattice, beta: float, cutoff: int) -> None:
        self.lattice = lattice
        self.cutoff = cutoff
        heights = np.arange(-cutoff, cutoff + 1)
        self._span = 3 * cutoff
        self._r = bessel_ratio_table(beta, self._span)
        self._g = log_derivative_table(beta, self._span)
        self._diff = np.subtract.outer(heights, heights)
        self._heights = heights
        self._in_x = np.isin(np.arange(lattice.n_edges), lattice.loop_x)
        self._in_y = np.isin(np.arange(lattice.n_edges), lattice.loop_y)
        tables = self._tables(0, 0, None)
        self._path = np.einsum_path(*self._interleave(tables), optimize="greedy")[0]

    def _edge_values(self, e: int, shift: int) -> tuple[NDArray[np.int64], list[int]]:
        fp = int(self.lattice.face_plus[e])
        fm = int(self.lattice.face_minus[e])
        if fp != 0 and fm != 0:
            return self._diff + shift, [fp - 1, fm - 1]
        if fp == 0:
            return -self._heights + shift, [fm - 1]
        return self._heights + shift, [fp - 1]

    def _tables(
        self, m: int, m_prime: int, marked: int | None
    ) -> list[tuple[NDArray[np.float64], list[int]]]:
        out = []
        for e in range(self.lattice.n_edges):
            shift = m * int(self._in_x[e]) + m_prime * int(self._in_y[e])
            values, labels = self._edge_values(e, shift)
            table = self._r[values + self._span]
            if e == marked:
                table = table * self._g[values + self._span]
            out.append((table, labels))
        return out

    @staticmethod
    def _interleave(tables: list[tuple[NDArray[np.float64], list[int]]]) -> list[Any]:
        args: list[Any] = []
        for table, labels in tables:
            args += [table, labels]
        args.append([])
        return args

    def contract(self, m: int, m_prime: int, marked: int | None = None) -> float:
        tables = self._tables(m, m_prime, marked)
        return float(np.einsum(*self._interleave(tables), optimize=self._path))


def contraction_sums(size: int, beta: float, cutoff: int, with_energy: bool = False) -> WindingSums:
    """Winding-resolved dual sum over the height box, by factor-graph contraction."""
    lattice = build_torus(size)
    net = _HeightNetwork(lattice, beta, cutoff)
    a, b = lattice.cut_winding()
    weights: dict[int, float] = {}
    energies: dict[int, float] | None = {} if with_energy else None
    # (n, m, m') -> (-n, -m, -m') maps the box to itself with equal weight.
    for m in range(0, cutoff + 1):
        for m_prime in range(-cutoff, cutoff + 1):
            w = net.contract(m, m_prime)
            e_w = (
                sum(net.contract(m, m_prime, marked=e) for e in range(lattice.n_edges))
                if energies is not None else 0.0
            )
            k0 = a * m + b * m_prime
            images = [k0] if m == 0 else [k0, -k0]
            for k in images:
                weights[k] = weights.get(k, 0.0) + w
                if energies is not None:
                    energies[k] = energies.get(k, 0.0) + e_w
    return WindingSums.from_mapping(weights, energies)


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def _initial_cutoff(beta: float) -> int:
    return math.ceil(2.0 * math.sqrt(beta)) + 3


def _evaluate_sums(
    spec: DualSumSpec,
    fn: SumsFn,
    qmax: int,
    tolerance: float,
    with_energy: bool,
) -> PartitionResult:
    if spec.cutoff is not None:
        q = spec.cutoff
        current = fn(spec.size, spec.beta, q, with_energy)
        previous = fn(spec.size, spec.beta, q - 1, False)
        change = abs(current.ln_total() - previous.ln_total())
    else:
        q = min(_initial_cutoff(spec.beta), qmax)
        previous = fn(spec.size, spec.beta, q - 1, False)
        current = fn(spec.size, spec.beta, q, False)
        change = abs(current.ln_total() - previous.ln_total())
        while change >= tolerance and q < qmax:
            q += 1
            previous, current = current, fn(spec.size, spec.beta, q, False)
            change = abs(current.ln_total() - previous.ln_total())
            logger.debug("L=%d beta=%.4g Q=%d change=%.3e", spec.size, spec.beta, q, change)
        if with_energy:
            current = fn(spec.size, spec.beta, q, True)

    converged = change < tolerance
    if not converged:
        logger.warning(
            "Cutoff Q=%d not converged for L=%d beta=%.4g (change %.2e >= %.1e)",
            q, spec.size, spec.beta, change, tolerance,
        )

    n_edges = 2 * spec.size * spec.size
    ln_i0 = log_bessel_i(0, spec.beta)
    d_ln_z = current.mean_log_derivative()
    return PartitionResult(
        size=spec.size,
        beta=spec.beta,
        twist=spec.twist,
        method=spec.method,
        cutoff=q,
        ln_z=current.ln_total() + n_edges * ln_i0,
        ln_z_phi=current.ln_twisted(spec.twist) + n_edges * ln_i0,
        k_mean=current.moment(1),
        k2_mean=current.moment(2),
        energy_mean=None if d_ln_z is None else -d_ln_z,
        convergence=change,
        converged=converged,
        ln_i0=ln_i0,
        winding=[int(k) for k in current.winding],
        winding_log_weight=[float(v) for v in np.log(current.weight)],
    )


def z_dual_sum(
    spec: DualSumSpec, *, tolerance: float = DEFAULT_TOLERANCE, with_energy: bool = False
) -> PartitionResult:
    """Z_phi by contracting the height box (enumerate method, L <= 3)."""
    spec = spec.model_copy(update={"method": DualMethod.ENUMERATE})
    spec.check_supported()
    return _evaluate_sums(spec, contraction_sums, ENUMERATE_MAX_CUTOFF, tolerance, with_energy)


def z_transfer(
    spec: DualSumSpec,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_states: int = DEFAULT_MAX_STATES,
    with_energy: bool = False,
) -> PartitionResult:
    """Z_phi by column transfer (transfer method, L <= 5)."""
    spec = spec.model_copy(update={"method": DualMethod.TRANSFER})
    spec.check_supported()
    qmax = max_cutoff(spec.size, max_states)
    if qmax < 1:
        raise StateSpaceError(f"no cutoff Q >= 1 fits {max_states} states at L={spec.size}")

    def fn(size: int, beta: float, q: int, energy: bool) -> WindingSums:
        return transfer_sums(size, beta, q, max_states=max_states, with_energy=energy)

    return _evaluate_sums(spec, fn, qmax, tolerance, with_energy)


def z_quadrature(spec: DualSumSpec, *, grid: int = 96) -> PartitionResult:
    """Direct angle quadrature packaged as a :class:`PartitionResult` (L = 2 only)."""
    spec = spec.model_copy(update={"method": DualMethod.QUADRATURE})
    spec.check_supported()
    ln_z, energy = quadrature_moments(spec.beta, grid=grid)
    ln_z_phi, _ = quadrature_moments(spec.beta, grid=grid, twist=spec.twist)
    coarse, _ = quadrature_moments(spec.beta, grid=grid - 8, check_grid=False)
    return PartitionResult(
        size=spec.size,
        beta=spec.beta,
        twist=spec.twist,
        method=DualMethod.QUADRATURE,
        cutoff=grid,
        ln_z=ln_z,
        ln_z_phi=ln_z_phi,
        energy_mean=energy,
        convergence=abs(ln_z - coarse),
        converged=abs(ln_z - coarse) < DEFAULT_TOLERANCE,
        ln_i0=log_bessel_i(0, spec.beta),
    )


def evaluate(
    spec: DualSumSpec,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_states: int = DEFAULT_MAX_STATES,
    grid: int = 96,
    with_energy: bool = False,
) -> PartitionResult:
    """Dispatch on ``spec.method``."""
    match spec.method:
        case DualMethod.ENUMERATE:
            return z_dual_sum(spec, tolerance=tolerance, with_energy=with_energy)
        case DualMethod.TRANSFER:
            return z_transfer(
                spec, tolerance=tolerance, max_states=max_states, with_energy=with_energy
            )
        case DualMethod.QUADRATURE:
            return z_quadrature(spec, grid=grid)
    raise ValueError(f"unknown method {spec.method}")


# ---------------------------------------------------------------------------
# Derived observables
# ---------------------------------------------------------------------------


def _default_spec(
    size: int, beta: float, method: DualMethod | None, cutoff: int | None, twist: float = 0.0
) -> DualSumSpec:
    return DualSumSpec(
        size=size,
        beta=beta,
        cutoff=cutoff,
        twist=twist,
        method=method or DualMethod.TRANSFER,
    )


def stiffness_exact(
    size: int,
    beta: float,
    *,
    d: int = 2,
    method: DualMethod | None = None,
    cutoff: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_states: int = DEFAULT_MAX_STATES,
) -> float:
    """rho_s = T <K^2> L^{2-d}."""
    if beta == 0.0:
        return 0.0
    result = evaluate(
        _default_spec(size, beta, method, cutoff), tolerance=tolerance, max_states=max_states
    )
    assert result.k2_mean is not None
    return result.k2_mean / beta * float(size) ** (2 - d)


def stiffness_second_difference(
    size: int,
    beta: float,
    *,
    phi: float = 0.05,
    method: DualMethod | None = None,
    cutoff: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> float:
    """Central second difference of -T ln Z_phi at phi = +/-``phi`` (independent evaluations)."""
    ln_z = {
        sign: evaluate(
            _default_spec(size, beta, method, cutoff, twist=sign * phi), max_states=max_states
        ).ln_z_phi
        for sign in (-1.0, 0.0, 1.0)
    }
    return -(ln_z[1.0] - 2.0 * ln_z[0.0] + ln_z[-1.0]) / (beta * phi * phi)


def energy_exact(
    size: int,
    beta: float,
    *,
    method: DualMethod | None = None,
    cutoff: int | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_states: int = DEFAULT_MAX_STATES,
) -> float:
    """<E> = -d ln Z / d beta, using I_k' = (I_{k-1} + I_{k+1}) / 2."""
    result = evaluate(
        _default_spec(size, beta, method, cutoff),
        tolerance=tolerance,
        max_states=max_states,
        with_energy=True,
    )
    assert result.energy_mean is not None
    return result.energy_mean


def log_partition_direct(lattice: TorusLattice, beta: float, cutoff: int) -> float:
    """ln Z from the brute-force term stream (no grouping, no symmetry)."""
    weights = np.array([term.weight for term in iter_current_terms(lattice, beta, cutoff)])
    return float(special.logsumexp(np.log(weights[weights > 0]))) + lattice.n_edges * log_bessel_i(
        0, beta
    )
