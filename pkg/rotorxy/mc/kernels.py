"""
Compiled update and measurement kernels for the 2D XY model (J = 1).

Kernels take the angle array, the (N, 4) neighbor table of the torus and a
``numpy.random.Generator``; all randomness comes from ``rng.random()`` so a chain is
reproducible from its seed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def metropolis_sweep(theta, neighbors, beta, width, rng):  # type: ignore[no-untyped-def]
    """One sequential Metropolis sweep with uniform proposals theta + width*(2u - 1).

    Returns the number of accepted moves.
    """
    n = theta.shape[0]
    accepted = 0
    for i in range(n):
        old = theta[i]
        new = old + width * (2.0 * rng.random() - 1.0)
        delta = 0.0
        for k in range(4):
            tj = theta[neighbors[i, k]]
            delta += math.cos(old - tj) - math.cos(new - tj)
        if delta <= 0.0 or rng.random() < math.exp(-beta * delta):
            theta[i] = new % TWO_PI
            accepted += 1
    return accepted


@njit(cache=True)
def overrelax_sweep(theta, neighbors):  # type: ignore[no-untyped-def]
    """Microcanonical reflection of every spin about its local field."""
    n = theta.shape[0]
    for i in range(n):
        hx = 0.0
        hy = 0.0
        for k in range(4):
            tj = theta[neighbors[i, k]]
            hx += math.cos(tj)
            hy += math.sin(tj)
        if hx * hx + hy * hy < 1e-24:
            continue
        psi = math.atan2(hy, hx)
        theta[i] = (2.0 * psi - theta[i]) % TWO_PI


@njit(cache=True)
def wolff_cluster(theta, neighbors, beta, rng, members, in_cluster):  # type: ignore[no-untyped-def]
    """Grow and reflect one embedded cluster; returns its size.

    Spins are reflected about the line perpendicular to a random axis alpha,
    theta -> 2 alpha + pi - theta. Bonds are added with probability
    1 - exp(min(0, -2 beta p_i p_j)) from the projections before reflection.
    """
    n = theta.shape[0]
    alpha = TWO_PI * rng.random()
    seed = int(rng.random() * n)
    if seed >= n:
        seed = n - 1
    members[0] = seed
    in_cluster[seed] = True
    head = 0
    size = 1
    while head < size:
        i = members[head]
        head += 1
        p_i = math.cos(theta[i] - alpha)
        for k in range(4):
            j = neighbors[i, k]
            if in_cluster[j]:
                continue
            p_j = math.cos(theta[j] - alpha)
            arg = -2.0 * beta * p_i * p_j
            if arg < 0.0 and rng.random() < 1.0 - math.exp(arg):
                in_cluster[j] = True
                members[size] = j
                size += 1
        theta[i] = (2.0 * alpha + math.pi - theta[i]) % TWO_PI
    for c in range(size):
        in_cluster[members[c]] = False
    return size


@njit(cache=True)
def wolff_sweep(theta, neighbors, beta, rng, members, in_cluster):  # type: ignore[no-untyped-def]
    """Clusters until at least N spins have been reflected; returns (flipped, clusters)."""
    n = theta.shape[0]
    flipped = 0
    clusters = 0
    while flipped < n:
        flipped += wolff_cluster(theta, neighbors, beta, rng, members, in_cluster)
        clusters += 1
    return flipped, clusters


@njit(cache=True)
def measure(theta, edge_start, edge_end, x_edges, seam_edges):  # type: ignore[no-untyped-def]
    """(E, sum cos / sum sin over x-bonds, sum cos / sum sin over the seam, m_x, m_y)."""
    energy = 0.0
    for e in range(edge_start.shape[0]):
        energy -= math.cos(theta[edge_start[e]] - theta[edge_end[e]])
    xc = 0.0
    xs = 0.0
    for e in x_edges:
        d = theta[edge_start[e]] - theta[edge_end[e]]
        xc += math.cos(d)
        xs += math.sin(d)
    bc = 0.0
    bs = 0.0
    for e in seam_edges:
        d = theta[edge_start[e]] - theta[edge_end[e]]
        bc += math.cos(d)
        bs += math.sin(d)
    mx = 0.0
    my = 0.0
    for i in range(theta.shape[0]):
        mx += math.cos(theta[i])
        my += math.sin(theta[i])
    return energy, xc, xs, bc, bs, mx, my


def empty_cluster_buffers(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Scratch arrays for :func:`wolff_cluster`."""
    return np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.bool_)
