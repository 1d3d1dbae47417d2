"""
rotorxy: the 2D XY model and the phase-noise resilience of the toric-rotor code.

Monte Carlo and exact integer-current evaluation of the spin stiffness, and the logical
phase-gate fidelity of a toric-rotor code under von Mises noise, which maps onto it.
"""

__version__ = "0.1.0"

from rotorxy.core.engine import SweepEngine
from rotorxy.core.lattice import build_torus, check_code_algebra
from rotorxy.core.models import DualSumSpec, MCParams
from rotorxy.exact.dual import evaluate, stiffness_exact
from rotorxy.mc.simulation import run
from rotorxy.rotor.resilience import lambda_gaussian, lambda_sweep

__all__ = [
    "SweepEngine",
    "build_torus",
    "check_code_algebra",
    "DualSumSpec",
    "MCParams",
    "evaluate",
    "stiffness_exact",
    "run",
    "lambda_gaussian",
    "lambda_sweep",
    "__version__",
]
