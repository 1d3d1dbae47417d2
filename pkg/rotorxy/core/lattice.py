"""
Oriented L x L torus shared by the XY model and the toric-rotor code.

Horizontal edges point +x, vertical edges point +y. Vertices, faces and edges are indexed
row-major: vertex (x, y) -> y*L + x, face (x, y) has its lower-left corner at vertex (x, y),
and edge id = 2*vertex + axis (axis 0 = x, 1 = y). Face orientation is clockwise, so an
edge has incidence +1 with the face it runs clockwise around.

Loops and cuts:
    C_x   = {h(x, 0)}       primal loop winding in x
    C_y   = {v(0, y)}       primal loop winding in y
    B_ybar = {h(L-1, y)}    x-edges crossed by the vertical dual loop (twist seam)
    B_xbar = {v(x, L-1)}    y-edges crossed by the horizontal dual loop
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from scipy import sparse

from rotorxy.errors import CodeAlgebraError, LatticeSizeError

logger = logging.getLogger(__name__)

AXIS_X = 0
AXIS_Y = 1

IntArray = NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class TorusLattice:
    """Immutable incidence data of the oriented torus."""
    size: int
    edge_start: IntArray
    edge_end: IntArray
    edge_axis: IntArray
    face_plus: IntArray
    face_minus: IntArray
    face_incidence: sparse.csr_matrix      # (M, F) entries eps_{e,f}
    vertex_incidence: sparse.csr_matrix    # (M, N) entries eps_{e,v}
    loop_x: IntArray
    loop_y: IntArray
    cut_xbar: IntArray
    cut_ybar: IntArray
    neighbors: IntArray = field(repr=False)  # (N, 4): +x, -x, +y, -y

    @property
    def n_vertices(self) -> int:
        return self.size * self.size

    @property
    def n_edges(self) -> int:
        return 2 * self.size * self.size

    @property
    def n_faces(self) -> int:
        return self.size * self.size

    # ------------------------------------------------------------------
    # Coordinates
    # ------------------------------------------------------------------

    def vertex_index(self, x: int, y: int) -> int:
        return (y % self.size) * self.size + (x % self.size)

    def vertex_coords(self, v: int) -> tuple[int, int]:
        return v % self.size, v // self.size

    def face_index(self, x: int, y: int) -> int:
        return self.vertex_index(x, y)

    def face_coords(self, f: int) -> tuple[int, int]:
        return self.vertex_coords(f)

    def edge_index(self, x: int, y: int, axis: int) -> int:
        return 2 * self.vertex_index(x, y) + axis

    def edge_coords(self, e: int) -> tuple[int, int, int]:
        x, y = self.vertex_coords(e // 2)
        return x, y, e % 2

    # ------------------------------------------------------------------
    # Derived data
    # ------------------------------------------------------------------

    def indicator(self, edges: IntArray) -> NDArray[np.float64]:
        """0/1 vector over edges marking ``edges``."""
        out = np.zeros(self.n_edges)
        out[edges] = 1.0
        return out

    @property
    def twist_mask(self) -> NDArray[np.bool_]:
        """delta_e: True on the twist seam B_ybar."""
        return self.indicator(self.cut_ybar).astype(bool)

    @property
    def x_edges(self) -> IntArray:
        return np.flatnonzero(self.edge_axis == AXIS_X)

    def cut_winding(self) -> tuple[int, int]:
        """Coefficients (a, b) with K = a*m + b*m' for every current configuration.

        Face heights never contribute to K because every face meets the seam in
        edges of opposite sign.
        """
        seam = self.indicator(self.cut_ybar)
        return (
            int(round(seam @ self.indicator(self.loop_x))),
            int(round(seam @ self.indicator(self.loop_y))),
        )

    def incidence_frame(self) -> pd.DataFrame:
        """Edge table in the column order of ``lattice-check --dump``."""
        return pd.DataFrame({
            "edge_id": np.arange(self.n_edges),
            "start": self.edge_start,
            "end": self.edge_end,
            "axis": np.where(self.edge_axis == AXIS_X, "x", "y"),
            "f_plus": self.face_plus,
            "f_minus": self.face_minus,
        })

    def with_face_sign_flipped(self, edge: int, face: int) -> TorusLattice:
        """Copy of the lattice with one eps_{e,f} negated (fault injection)."""
        inc = self.face_incidence.tolil(copy=True)
        if inc[edge, face] == 0:
            raise ValueError(f"edge {edge} is not on the boundary of face {face}")
        inc[edge, face] = -inc[edge, face]
        return replace(self, face_incidence=inc.tocsr())


def build_torus(size: int) -> TorusLattice:
    """Build the oriented L x L torus. Raises :class:`LatticeSizeError` for L < 2."""
    if size < 2:
        raise LatticeSizeError(f"lattice size must be at least 2, got {size}")
    L = size
    n = L * L
    m = 2 * n

    xs, ys = np.meshgrid(np.arange(L), np.arange(L))
    xs, ys = xs.ravel(), ys.ravel()  # row-major: index = y*L + x
    vert = ys * L + xs
    right = ys * L + (xs + 1) % L
    left = ys * L + (xs - 1) % L
    up = ((ys + 1) % L) * L + xs
    down = ((ys - 1) % L) * L + xs

    edge_start = np.repeat(vert, 2).astype(np.int64)
    edge_end = np.empty(m, dtype=np.int64)
    edge_end[0::2] = right
    edge_end[1::2] = up
    edge_axis = np.tile(np.array([AXIS_X, AXIS_Y], dtype=np.int64), n)

    # h(x,y) is the top of face (x,y-1) and the bottom of face (x,y);
    # v(x,y) is the left of face (x,y) and the right of face (x-1,y).
    face_plus = np.empty(m, dtype=np.int64)
    face_minus = np.empty(m, dtype=np.int64)
    face_plus[0::2] = down
    face_minus[0::2] = vert
    face_plus[1::2] = vert
    face_minus[1::2] = left

    rows = np.concatenate([np.arange(m), np.arange(m)])
    signs = np.concatenate([np.ones(m), -np.ones(m)])
    face_incidence = sparse.csr_matrix(
        (signs, (rows, np.concatenate([face_plus, face_minus]))),
        shape=(m, n),
    )
    vertex_incidence = sparse.csr_matrix(
        (np.concatenate([np.ones(m), -np.ones(m)]), (rows, np.concatenate([edge_start, edge_end]))),
        shape=(m, n),
    )

    line = np.arange(L)
    loop_x = 2 * line                              # h(x, 0)
    loop_y = 2 * (line * L) + AXIS_Y               # v(0, y)
    cut_ybar = 2 * (line * L + (L - 1))            # h(L-1, y)
    cut_xbar = 2 * ((L - 1) * L + line) + AXIS_Y   # v(x, L-1)

    lattice = TorusLattice(
        size=L,
        edge_start=edge_start,
        edge_end=edge_end,
        edge_axis=edge_axis,
        face_plus=face_plus,
        face_minus=face_minus,
        face_incidence=face_incidence,
        vertex_incidence=vertex_incidence,
        loop_x=loop_x.astype(np.int64),
        loop_y=loop_y.astype(np.int64),
        cut_xbar=cut_xbar.astype(np.int64),
        cut_ybar=cut_ybar.astype(np.int64),
        neighbors=np.stack([right, left, up, down], axis=1).astype(np.int64),
    )
    logger.debug("Built %dx%d torus: %d edges", L, L, m)
    return lattice


# ---------------------------------------------------------------------------
# Integer currents
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurrentConfig:
    """Face heights (reference face pinned to 0), windings and the derived edge currents."""
    heights: IntArray
    m: int
    m_prime: int
    currents: IntArray

    def divergence(self, lattice: TorusLattice) -> IntArray:
        return np.rint(lattice.vertex_incidence.T @ self.currents).astype(np.int64)

    def is_divergence_free(self, lattice: TorusLattice) -> bool:
        return not np.any(self.divergence(lattice))

    def cut_current(self, lattice: TorusLattice) -> int:
        """K: total current through the twist seam."""
        return int(self.currents[lattice.cut_ybar].sum())


def currents_from_heights(
    lattice: TorusLattice, heights: IntArray | list[int], m: int, m_prime: int
) -> CurrentConfig:
    """k = D_f n + m 1[C_x] + m' 1[C_y], with heights given for faces 1..N-1."""
    h = np.asarray(heights, dtype=np.int64)
    if h.shape != (lattice.n_faces - 1,):
        raise ValueError(f"expected {lattice.n_faces - 1} heights, got shape {h.shape}")
    full = np.concatenate([np.zeros(1, dtype=np.int64), h])
    k = np.rint(lattice.face_incidence @ full).astype(np.int64)
    k[lattice.loop_x] += m
    k[lattice.loop_y] += m_prime
    return CurrentConfig(heights=h, m=int(m), m_prime=int(m_prime), currents=k)


# ---------------------------------------------------------------------------
# Stabilizer / logical-operator algebra
# ---------------------------------------------------------------------------


class AlgebraCheck(BaseModel):
    """Outcome of one combinatorial identity."""
    name: str
    passed: bool
    violations: list[dict[str, Any]] = Field(default_factory=list)


class AlgebraReport(BaseModel):
    """Result of :func:`check_code_algebra`."""
    size: int
    checks: list[AlgebraCheck]
    crossings: dict[str, int] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[AlgebraCheck]:
        return [c for c in self.checks if not c.passed]

    def raise_for_failure(self) -> None:
        bad = self.failures()
        if bad:
            names = ", ".join(c.name for c in bad)
            raise CodeAlgebraError(f"code algebra failed on L={self.size}: {names}")


# (loop, cut) -> expected crossing number
EXPECTED_CROSSINGS: dict[tuple[str, str], int] = {
    ("C_x", "B_ybar"): 1,
    ("C_y", "B_xbar"): 1,
    ("C_x", "B_xbar"): 0,
    ("C_y", "B_ybar"): 0,
}


def _nonzero_pairs(mat: sparse.spmatrix, row_key: str, col_key: str) -> list[dict[str, Any]]:
    coo = sparse.coo_matrix(mat)
    mask = np.abs(coo.data) > 1e-12
    return [
        {row_key: int(r), col_key: int(c), "value": float(v)}
        for r, c, v in zip(coo.row[mask], coo.col[mask], coo.data[mask], strict=True)
    ]


def check_code_algebra(lattice: TorusLattice) -> AlgebraReport:
    """Verify incidence, commutation, crossing and redundancy identities of the code."""
    ef = lattice.face_incidence
    ev = lattice.vertex_incidence
    L = lattice.size
    checks: list[AlgebraCheck] = []

    face_counts = np.diff(ef.indptr)
    face_sums = np.asarray(ef.sum(axis=1)).ravel()
    bad_edges = np.flatnonzero((face_counts != 2) | (np.abs(face_sums) > 1e-12))
    checks.append(AlgebraCheck(
        name="edge_faces",
        passed=bad_edges.size == 0,
        violations=[{"edge": int(e), "face_sum": float(face_sums[e])} for e in bad_edges],
    ))

    expected_ev = sparse.csr_matrix(
        (np.concatenate([np.ones(lattice.n_edges), -np.ones(lattice.n_edges)]),
         (np.tile(np.arange(lattice.n_edges), 2),
          np.concatenate([lattice.edge_start, lattice.edge_end]))),
        shape=ev.shape,
    )
    checks.append(AlgebraCheck(
        name="edge_vertices",
        passed=(ev - expected_ev).count_nonzero() == 0,
        violations=_nonzero_pairs(ev - expected_ev, "edge", "vertex"),
    ))

    commutator = (ev.T @ ef).tocsr()
    commutator.eliminate_zeros()
    checks.append(AlgebraCheck(
        name="stabilizer_commutation",
        passed=commutator.count_nonzero() == 0,
        violations=_nonzero_pairs(commutator, "vertex", "face"),
    ))

    loops = {"C_x": lattice.loop_x, "C_y": lattice.loop_y}
    cuts = {"B_xbar": lattice.cut_xbar, "B_ybar": lattice.cut_ybar}
    crossings: dict[str, int] = {}
    crossing_violations: list[dict[str, Any]] = []
    for (loop_name, cut_name), expected in EXPECTED_CROSSINGS.items():
        n_cross = int(np.intersect1d(loops[loop_name], cuts[cut_name]).size)
        crossings[f"{loop_name}*{cut_name}"] = n_cross
        if n_cross != expected:
            crossing_violations.append(
                {"loop": loop_name, "cut": cut_name, "crossings": n_cross, "expected": expected}
            )
    for name, edges in {**loops, **cuts}.items():
        if edges.size != L:
            crossing_violations.append({"set": name, "size": int(edges.size), "expected": L})
    for name, edges in loops.items():
        axis = AXIS_X if name == "C_x" else AXIS_Y
        if np.any(lattice.edge_axis[edges] != axis):
            crossing_violations.append({"set": name, "wrong_axis": True})
    if np.any(lattice.edge_axis[lattice.cut_ybar] != AXIS_X):
        crossing_violations.append({"set": "B_ybar", "wrong_axis": True})
    checks.append(AlgebraCheck(
        name="logical_crossings", passed=not crossing_violations, violations=crossing_violations,
    ))

    # T loops commute with vertex stabilizers, W cuts with face stabilizers.
    closure: list[dict[str, Any]] = []
    for name, edges in loops.items():
        div = ev.T @ lattice.indicator(edges)
        closure += [{"loop": name, "vertex": int(v)} for v in np.flatnonzero(np.abs(div) > 1e-12)]
    for name, edges in cuts.items():
        circ = ef.T @ lattice.indicator(edges)
        closure += [{"cut": name, "face": int(f)} for f in np.flatnonzero(np.abs(circ) > 1e-12)]
    checks.append(AlgebraCheck(name="logical_closure", passed=not closure, violations=closure))

    face_total = ef @ np.ones(lattice.n_faces)
    vertex_total = ev @ np.ones(lattice.n_vertices)
    redundant = [
        {"chain": "faces", "edge": int(e)} for e in np.flatnonzero(np.abs(face_total) > 1e-12)
    ] + [
        {"chain": "vertices", "edge": int(e)} for e in np.flatnonzero(np.abs(vertex_total) > 1e-12)
    ]
    checks.append(AlgebraCheck(
        name="stabilizer_redundancy", passed=not redundant, violations=redundant,
    ))

    report = AlgebraReport(size=L, checks=checks, crossings=crossings)
    if not report.passed:
        logger.warning("Code algebra failed on L=%d: %s", L, [c.name for c in report.failures()])
    return report
