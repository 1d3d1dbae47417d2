"""
Column transfer matrix over integer-current states.

A column state is the vector a of the L horizontal currents entering a column. The
vertical currents of the column follow from current conservation row by row,
c_y = c_{y-1} + a_y - b_y, leaving one free vertical current t per column. With all
currents truncated to |k| <= Q,

    T[a, b] = sum_t prod_y r(c_y) * prod_y r(b_y),     r(k) = I_k(beta) / I_0(beta),

and Z / I_0^M = sum_S Tr(T_S^L), where S = sum(a) is conserved from column to column and
equals the cut winding K through the seam.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import NDArray

from rotorxy.errors import StateSpaceError
from rotorxy.exact.bessel import bessel_ratio_table, log_derivative_table
from rotorxy.exact.windings import WindingSums

logger = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 60_000


def state_count(size: int, cutoff: int) -> int:
    return (2 * cutoff + 1) ** size


def max_cutoff(size: int, max_states: int = DEFAULT_MAX_STATES) -> int:
    """Largest Q whose column state space fits in ``max_states``."""
    q = 0
    while state_count(size, q + 1) <= max_states:
        q += 1
    return q


def _column_matrices(
    prefix: NDArray[np.int32],
    cutoff: int,
    r_tab: NDArray[np.float64],
    g_tab: NDArray[np.float64] | None,
    offset: int,
) -> tuple[NDArray[np.float64], NDArray[np.float64] | None]:
    """Vertical-current factor A[a, b] (and its log-derivative-marked twin) for one S block."""
    n, L = prefix.shape
    a_mat = np.zeros((n, n))
    ag_mat = np.zeros((n, n)) if g_tab is not None else None
    diffs = [np.subtract.outer(prefix[:, y], prefix[:, y]) for y in range(L - 1)]
    for t in range(-cutoff, cutoff + 1):
        prod = np.full((n, n), r_tab[t + offset])
        gsum = np.full((n, n), g_tab[t + offset]) if g_tab is not None else None
        for d in diffs:
            idx = d + (t + offset)
            prod *= r_tab[idx]
            if gsum is not None and g_tab is not None:
                gsum += g_tab[idx]
        a_mat += prod
        if ag_mat is not None and gsum is not None:
            ag_mat += prod * gsum
    return a_mat, ag_mat


def transfer_sums(
    size: int,
    beta: float,
    cutoff: int,
    *,
    max_states: int = DEFAULT_MAX_STATES,
    with_energy: bool = False,
) -> WindingSums:
    """Winding-resolved dual sum on an L x L torus by column transfer."""
    n_states = state_count(size, cutoff)
    if n_states > max_states:
        raise StateSpaceError(
            f"transfer state space (2Q+1)^L = {n_states} exceeds the bound {max_states} "
            f"(L={size}, Q={cutoff})"
        )
    L = size
    width = 2 * cutoff + 1
    span = 2 * (L - 1) * cutoff + cutoff  # largest |c_y| reachable before truncation
    offset = span

    r_full = bessel_ratio_table(beta, span)
    ks = np.arange(-span, span + 1)
    inside = np.abs(ks) <= cutoff
    r_tab = np.where(inside, r_full, 0.0)
    g_tab = np.where(inside, log_derivative_table(beta, span), 0.0) if with_energy else None

    states = (np.indices((width,) * L).reshape(L, -1).T - cutoff).astype(np.int64)
    totals = states.sum(axis=1)
    r_b = r_tab[states + offset]
    col_weight = np.prod(r_b, axis=1)
    col_g = (
        np.sum(g_tab[states + offset], axis=1) if g_tab is not None else None
    )

    weights: dict[int, float] = {}
    energies: dict[int, float] | None = {} if with_energy else None
    for s in range(0, L * cutoff + 1):
        idx = np.flatnonzero(totals == s)
        if idx.size == 0:
            continue
        prefix = np.cumsum(states[idx], axis=1).astype(np.int32)
        a_mat, ag_mat = _column_matrices(prefix, cutoff, r_tab, g_tab, offset)
        w = col_weight[idx]
        t_mat = a_mat * w[None, :]
        power = t_mat
        for _ in range(L - 2):
            power = power @ t_mat
        # Tr(T^{L-1} X) = sum_ij (T^{L-1})_ij X_ji
        trace = float(np.sum(power * t_mat.T))
        weights[s] = weights[-s] = trace
        if energies is not None and ag_mat is not None and col_g is not None:
            tg_mat = ag_mat * w[None, :] + t_mat * col_g[idx][None, :]
            marked = L * float(np.sum(power * tg_mat.T))
            energies[s] = energies[-s] = marked
        logger.debug("transfer L=%d Q=%d S=%d block=%d trace=%.6e", L, cutoff, s, idx.size, trace)

    return WindingSums.from_mapping(weights, energies)
