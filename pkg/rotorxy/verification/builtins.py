"""
Built-in oracle checks for the XY / toric-rotor mapping.

Each check evaluates one identity with two independent computations and reports the
largest deviation against a fixed tolerance:
1. stabilizer and logical-operator algebra of the lattice;
2. the dual sum against brute force and against direct angle quadrature;
3. the two exact evaluators against each other;
4. stiffness, fidelity-susceptibility and Gaussian-law identities;
5. normalization of the noise density.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from rotorxy.core.lattice import build_torus, check_code_algebra
from rotorxy.core.models import DualMethod, DualSumSpec
from rotorxy.exact.dual import (
    contraction_sums,
    evaluate,
    log_partition_direct,
    stiffness_exact,
    stiffness_second_difference,
    z_dual_sum,
    z_transfer,
)
from rotorxy.exact.bessel import log_bessel_i
from rotorxy.exact.quadrature import z_vertex_quadrature
from rotorxy.rotor.fidelity import fidelity_curve, gaussian_law_deviation
from rotorxy.rotor.noise import von_mises_pdf
from rotorxy.verification.registry import (
    CheckOutcome,
    CheckRegistry,
    CheckSpec,
    VerificationContext,
    oracle_check,
)


def create_builtin_checks() -> list[CheckSpec]:
    """Return all built-in oracle checks in suite order."""

    # ------------------------------------------------------------------
    # Lattice
    # ------------------------------------------------------------------
    @oracle_check(
        name="lattice_algebra",
        description="Incidence, stabilizer commutation, logical crossings and redundancy.",
        tags=["lattice"],
    )
    def lattice_algebra(ctx: VerificationContext) -> CheckOutcome:
        report = check_code_algebra(build_torus(ctx.size))
        failed = [c.name for c in report.failures()]
        return CheckOutcome(
            name="lattice_algebra",
            passed=report.passed,
            value=float(len(failed)),
            detail=f"L={ctx.size}" + (f"; failed: {', '.join(failed)}" if failed else ""),
        )

    # ------------------------------------------------------------------
    # Mapping
    # ------------------------------------------------------------------
    @oracle_check(
        name="term_stream_vs_contraction",
        description="Brute-force current enumeration equals the contracted height sum (L=2).",
        tags=["mapping"],
    )
    def term_stream(ctx: VerificationContext) -> CheckOutcome:
        beta, cutoff, tol = 1.0, 2, 1e-12
        direct = log_partition_direct(build_torus(2), beta, cutoff)
        contracted = contraction_sums(2, beta, cutoff).ln_total() + 8 * log_bessel_i(0, beta)
        dev = abs(direct - contracted)
        return CheckOutcome(name="", passed=dev < tol, value=dev, tolerance=tol,
                            detail=f"beta={beta}, Q={cutoff}")

    @oracle_check(
        name="quadrature_vs_dual",
        description="Direct vertex quadrature and dual sum give the same ln Z on L=2.",
        tags=["mapping"],
    )
    def quadrature_vs_dual(ctx: VerificationContext) -> CheckOutcome:
        tol = 1e-8
        devs = []
        for beta in (0.5, 1.0, 2.0):
            quad = z_vertex_quadrature(2, beta)
            dual = z_dual_sum(DualSumSpec(size=2, beta=beta, method=DualMethod.ENUMERATE)).ln_z
            devs.append(abs(quad - dual))
        return CheckOutcome(name="", passed=max(devs) < tol, value=max(devs), tolerance=tol,
                            detail="beta in {0.5, 1, 2}")

    @oracle_check(
        name="enumerate_vs_transfer",
        description="Height-box contraction and column transfer agree on L=3, beta=1.",
        tags=["mapping"],
    )
    def enumerate_vs_transfer(ctx: VerificationContext) -> CheckOutcome:
        tol, cutoff = 1e-10, 8
        spec = DualSumSpec(size=3, beta=1.0, cutoff=cutoff)
        dev = abs(z_dual_sum(spec).ln_z - z_transfer(spec, max_states=ctx.max_states).ln_z)
        return CheckOutcome(name="", passed=dev < tol, value=dev, tolerance=tol,
                            detail=f"Q={cutoff}")

    # ------------------------------------------------------------------
    # Stiffness and fidelity identities
    # ------------------------------------------------------------------
    @oracle_check(
        name="stiffness_second_difference",
        description="T<K^2> equals the second difference of -T ln Z_phi at phi=+/-0.05.",
        tags=["stiffness"],
    )
    def stiffness_identity(ctx: VerificationContext) -> CheckOutcome:
        tol, size, beta, cutoff = 1e-4, 4, 1.25, 5
        analytic = stiffness_exact(size, beta, cutoff=cutoff, max_states=ctx.max_states)
        numeric = stiffness_second_difference(size, beta, cutoff=cutoff, max_states=ctx.max_states)
        dev = abs(analytic - numeric) / abs(analytic)
        return CheckOutcome(name="", passed=dev < tol, value=dev, tolerance=tol,
                            detail=f"L={size}, beta={beta}, rho_s={analytic:.6f}")

    @oracle_check(
        name="susceptibility_identity",
        description="chi_F = <K^2> equals rho_s / T.",
        tags=["fidelity"],
    )
    def susceptibility_identity(ctx: VerificationContext) -> CheckOutcome:
        tol, cutoff = 1e-10, 5
        size = min(max(ctx.size, 2), 4)
        devs = []
        for beta in (1.0, 2.0):
            result = evaluate(DualSumSpec(size=size, beta=beta, cutoff=cutoff),
                              max_states=ctx.max_states)
            rho = stiffness_exact(size, beta, cutoff=cutoff, max_states=ctx.max_states)
            chi = result.k2_mean or 0.0
            devs.append(abs(chi - rho * beta) / chi)
        return CheckOutcome(name="", passed=max(devs) < tol, value=max(devs), tolerance=tol,
                            detail=f"L={size}, beta in {{1, 2}}")

    @oracle_check(
        name="gaussian_fidelity_law",
        description="ln r(phi) = -chi_F phi^2 / 2 within 10% for |phi| <= 0.3 (L=4, sigma=0.4).",
        tags=["fidelity"],
    )
    def gaussian_law(ctx: VerificationContext) -> CheckOutcome:
        tol = 0.10
        curve = fidelity_curve(4, 0.4, [0.1, 0.2, 0.3], cutoff=5, max_states=ctx.max_states)
        dev = max(gaussian_law_deviation(curve))
        return CheckOutcome(name="", passed=dev < tol, value=dev, tolerance=tol,
                            detail=f"chi_F={curve.chi_f:.5f}")

    # ------------------------------------------------------------------
    # Noise
    # ------------------------------------------------------------------
    @oracle_check(
        name="von_mises_normalization",
        description="The noise density integrates to one over a period.",
        tags=["noise"],
    )
    def von_mises_norm(ctx: VerificationContext) -> CheckOutcome:
        tol = 1e-10
        devs = []
        for sigma in (0.2, 0.5, 2.0):
            total, _ = integrate.quad(
                lambda t, s=sigma: float(von_mises_pdf(t, s)), -math.pi, math.pi,
                epsabs=1e-13, epsrel=1e-13, limit=200,
            )
            devs.append(abs(total - 1.0))
        return CheckOutcome(name="", passed=bool(np.max(devs) < tol), value=float(max(devs)),
                            tolerance=tol, detail="sigma in {0.2, 0.5, 2}")

    return [
        lattice_algebra,
        term_stream,
        quadrature_vs_dual,
        enumerate_vs_transfer,
        stiffness_identity,
        susceptibility_identity,
        gaussian_law,
        von_mises_norm,
    ]


def default_registry() -> CheckRegistry:
    registry = CheckRegistry()
    for check in create_builtin_checks():
        registry.register(check)
    return registry
