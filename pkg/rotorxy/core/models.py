"""
Core data models for rotorxy.

Parameter records and result records shared by the Monte Carlo engine, the exact
integer-current evaluators, the rotor-code layer and the CLI. All models use Pydantic v2
for validation and JSON serialization; array-valued state (spin configurations, currents,
observable series) lives in plain dataclasses next to the code that produces it.
"""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from rotorxy.errors import LatticeSizeError

# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class Algorithm(str, Enum):
    """Monte Carlo update schemes."""
    METROPOLIS = "metropolis"
    METROPOLIS_OVERRELAX = "metropolis+overrelax"
    WOLFF = "wolff"


class StartMode(str, Enum):
    """Initial spin configuration."""
    COLD = "cold"
    HOT = "hot"


class EstimatorKind(str, Enum):
    """Placement of the twist used by a stiffness estimator."""
    DISTRIBUTED = "distributed"
    BOUNDARY = "boundary"


class DualMethod(str, Enum):
    """Exact partition-function evaluators."""
    ENUMERATE = "enumerate"
    TRANSFER = "transfer"
    QUADRATURE = "quadrature"


class ResilienceMode(str, Enum):
    """Weight function used for the resilience order parameter."""
    GAUSSIAN = "gaussian-weight"
    EXACT = "exact-ratio"


class LimitMode(str, Enum):
    """How stiffness is treated above the critical noise width."""
    FINITE = "finite"
    THERMODYNAMIC = "thermo"


# Largest lattice each exact method accepts.
METHOD_SIZE_LIMITS: dict[DualMethod, tuple[int, int]] = {
    DualMethod.ENUMERATE: (2, 3),
    DualMethod.TRANSFER: (2, 5),
    DualMethod.QUADRATURE: (2, 2),
}


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


class MCParams(BaseModel):
    """Parameters of one Monte Carlo chain at a single temperature (J = 1)."""
    model_config = ConfigDict(frozen=True)

    size: int = Field(ge=2, description="Linear lattice size L")
    temperature: float = Field(gt=0.0)
    sweeps: int = Field(default=100_000, ge=1, description="Measurement sweeps")
    therm: int | None = Field(default=None, ge=0, description="Thermalization sweeps")
    stride: int = Field(default=2, ge=1)
    algorithm: Algorithm = Algorithm.METROPOLIS_OVERRELAX
    width: float = Field(default=1.0, gt=0.0, le=math.pi, description="Proposal width (rad)")
    seed: int = Field(default=0, ge=0)
    start: StartMode | None = None
    point_index: int = Field(default=0, ge=0)

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    @property
    def resolved_therm(self) -> int:
        """Thermalization length: 10% of the measurement sweeps, at least 1000."""
        if self.therm is not None:
            return self.therm
        return max(1000, self.sweeps // 10)

    @property
    def resolved_start(self) -> StartMode:
        if self.start is not None:
            return self.start
        return StartMode.COLD if self.temperature < 1.0 else StartMode.HOT

    @property
    def n_measurements(self) -> int:
        return self.sweeps // self.stride


class StiffnessEstimate(BaseModel):
    """Helicity modulus with its jackknife error and the raw ingredient means."""
    rho_s: float
    error: float = Field(ge=0.0)
    kind: EstimatorKind
    e_dir: float = Field(description="Mean of the summed bond cosines")
    i_dir: float = Field(description="Mean of the summed bond sines")
    i_dir2: float = Field(description="Mean of the squared summed bond sines")
    n_bins: int = 0
    bin_size: int = 0


# ---------------------------------------------------------------------------
# Exact integer-current evaluation
# ---------------------------------------------------------------------------


class DualSumSpec(BaseModel):
    """What to evaluate exactly: lattice size, coupling, current cutoff, twist and method."""
    model_config = ConfigDict(frozen=True)

    size: int = Field(ge=2)
    beta: float = Field(ge=0.0)
    cutoff: int | None = Field(default=None, ge=1, description="Q; None selects adaptively")
    twist: float = Field(default=0.0, ge=-math.pi, le=math.pi)
    method: DualMethod = DualMethod.TRANSFER

    def check_supported(self) -> None:
        """Raise :class:`LatticeSizeError` if ``method`` cannot handle ``size``."""
        lo, hi = METHOD_SIZE_LIMITS[self.method]
        if not lo <= self.size <= hi:
            raise LatticeSizeError(
                f"method '{self.method.value}' supports L in [{lo}, {hi}], got L={self.size}"
            )


class PartitionResult(BaseModel):
    """Result of an exact evaluation.

    ``winding`` and ``winding_log_weight`` hold the distribution of the cut winding current
    K (unnormalized log-weights, with ``ln I0(beta)`` per edge factored out). Any twisted
    partition function follows from it without re-evaluation, see :meth:`ln_z_at`.
    """
    size: int
    beta: float
    twist: float = 0.0
    method: DualMethod
    cutoff: int
    ln_z: float
    ln_z_phi: float
    k_mean: float | None = None
    k2_mean: float | None = None
    energy_mean: float | None = None
    convergence: float = 0.0
    converged: bool = True
    ln_i0: float = 0.0
    winding: list[int] = Field(default_factory=list)
    winding_log_weight: list[float] = Field(default_factory=list)

    @property
    def edge_count(self) -> int:
        return 2 * self.size * self.size

    @property
    def log_fidelity_density(self) -> float:
        """ln F per edge, where F = Z / I0(beta)^M."""
        return (self.ln_z - self.edge_count * self.ln_i0) / self.edge_count

    def ln_z_at(self, phi: float) -> float:
        """ln Z_phi from the stored winding distribution."""
        if not self.winding:
            raise ValueError("result carries no winding distribution")
        k = np.asarray(self.winding, dtype=float)
        lw = np.asarray(self.winding_log_weight, dtype=float)
        shift = float(lw.max())
        total = float(np.sum(np.exp(lw - shift) * np.cos(phi * k)))
        return shift + math.log(total) + self.edge_count * self.ln_i0

    def summary(self) -> dict[str, Any]:
        """Compact record emitted by the ``exact-z`` command."""
        return {
            "lnZ": self.ln_z,
            "lnZ_phi": self.ln_z_phi,
            "K2_mean": self.k2_mean,
            "convergence": self.convergence,
            "converged": self.converged,
            "method": self.method.value,
            "cutoff": self.cutoff,
            "size": self.size,
            "beta": self.beta,
            "twist": self.twist,
            "energy_mean": self.energy_mean,
            "lnF_per_edge": self.log_fidelity_density,
        }


# ---------------------------------------------------------------------------
# Rotor code
# ---------------------------------------------------------------------------


class NoiseModel(BaseModel):
    """von Mises phase noise of width sigma; concentration and inverse temperature are 1/sigma."""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(gt=0.0)

    @property
    def kappa(self) -> float:
        return 1.0 / self.sigma

    @property
    def beta(self) -> float:
        return 1.0 / self.sigma

    @property
    def temperature(self) -> float:
        return self.sigma


class ResilienceResult(BaseModel):
    """Resilience order parameter lambda = <cos phi> for one noise width."""
    lam: float = Field(ge=-1.0, le=1.0)
    error: float = Field(default=0.0, ge=0.0)
    sigma: float
    rho_s: float
    d: int = 2
    size: int
    mode: ResilienceMode = ResilienceMode.GAUSSIAN
    normalization: float = Field(description="Integral of the weight over [-pi, pi]")


class FidelityCurve(BaseModel):
    """Relative fidelity r(phi) = Z_phi / Z on a grid, with the fidelity susceptibility."""
    size: int
    sigma: float
    phis: list[float]
    ln_r: list[float]
    chi_f: float

    @property
    def r(self) -> list[float]:
        return [math.exp(v) for v in self.ln_r]


# ---------------------------------------------------------------------------
# Command-line runs
# ---------------------------------------------------------------------------


class RunConfig(BaseModel):
    """Resolved parameters of one CLI invocation, echoed into ``meta.json``."""
    command: str
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)
    out_dir: Path = Path("results")

    @field_validator("out_dir")
    @classmethod
    def _writable(cls, value: Path) -> Path:
        if value.exists() and not value.is_dir():
            raise ValueError(f"output path {value} exists and is not a directory")
        return value
