"""Tests for the noisy toric-rotor code: noise, syndromes, fidelity and resilience."""

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from scipy import integrate, special

from rotorxy.core.lattice import build_torus
from rotorxy.core.models import LimitMode, ResilienceMode
from rotorxy.errors import BracketingError, DomainError
from rotorxy.exact.dual import stiffness_exact
from rotorxy.rotor.fidelity import (
    fidelity_curve,
    fidelity_stiffness,
    gaussian_law_deviation,
    rel_fidelity,
)
from rotorxy.rotor.noise import (
    concentration,
    holonomies,
    syndrome_statistics,
    von_mises_pdf,
    von_mises_sample,
    wrap_angle,
)
from rotorxy.rotor.resilience import (
    StiffnessTable,
    lambda_exact,
    lambda_gaussian,
    lambda_size_scan,
    lambda_sweep,
)


def _table(temps: list[float], rho: list[float], err: float = 0.0) -> StiffnessTable:
    frame = pd.DataFrame({"T": temps, "rho_s": rho, "rho_s_err": [err] * len(temps)})
    return StiffnessTable.from_frame(frame)


# ============================================================================
# Noise model
# ============================================================================

class TestNoise:
    def test_concentration(self) -> None:
        assert concentration(0.5) == 2.0
        for sigma in (0.0, -1.0, math.nan):
            with pytest.raises(DomainError):
                concentration(sigma)

    @pytest.mark.parametrize("sigma", [0.05, 0.5, 3.0])
    def test_pdf_normalized(self, sigma: float) -> None:
        total, _ = integrate.quad(
            lambda t: float(von_mises_pdf(t, sigma)), -math.pi, math.pi, points=[0.0], limit=200
        )
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_sampler_mean_cosine(self) -> None:
        rng = np.random.default_rng(0)
        samples = np.asarray(von_mises_sample(rng, 0.5, 1_000_000))
        expected = special.iv(1, 2.0) / special.iv(0, 2.0)
        assert np.cos(samples).mean() == pytest.approx(expected, abs=3e-3)
        assert np.abs(np.sin(samples).mean()) < 3e-3
        assert np.all(np.abs(samples) <= math.pi)

    def test_sampler_shapes(self) -> None:
        rng = np.random.default_rng(1)
        assert isinstance(von_mises_sample(rng, 0.3), float)
        assert np.asarray(von_mises_sample(rng, 0.3, (4, 5))).shape == (4, 5)

    def test_narrow_noise_is_concentrated(self) -> None:
        samples = np.asarray(von_mises_sample(np.random.default_rng(5), 1e-3, 10_000))
        assert np.all(np.abs(samples) < 0.2)

    def test_wide_noise_is_uniform(self) -> None:
        rng = np.random.default_rng(2)
        samples = np.asarray(von_mises_sample(rng, 1e9, 200_000))
        assert np.abs(np.cos(samples).mean()) < 1e-2

    def test_wrap_angle(self) -> None:
        wrapped = wrap_angle([0.0, math.pi, 3 * math.pi / 2, -7.0])
        assert np.all((wrapped >= -math.pi) & (wrapped < math.pi))
        assert wrapped[2] == pytest.approx(-math.pi / 2)


class TestHolonomies:
    def setup_method(self) -> None:
        self.lat = build_torus(4)

    def test_pure_gauge_has_no_syndrome(self) -> None:
        alpha = np.random.default_rng(3).uniform(-1.0, 1.0, self.lat.n_vertices)
        syndrome = holonomies(self.lat, self.lat.vertex_incidence @ alpha)
        assert syndrome.max_face == pytest.approx(0.0, abs=1e-12)
        assert syndrome.loop_x == pytest.approx(0.0, abs=1e-12)
        assert syndrome.loop_y == pytest.approx(0.0, abs=1e-12)

    def test_single_edge_error(self) -> None:
        errors = np.zeros(self.lat.n_edges)
        e = self.lat.edge_index(1, 2, 0)
        errors[e] = 0.3
        syndrome = holonomies(self.lat, errors)
        assert syndrome.face[self.lat.face_plus[e]] == pytest.approx(0.3)
        assert syndrome.face[self.lat.face_minus[e]] == pytest.approx(-0.3)
        assert np.count_nonzero(syndrome.face) == 2

    def test_logical_error_on_loop(self) -> None:
        errors = np.zeros(self.lat.n_edges)
        errors[self.lat.loop_x] = 0.1
        syndrome = holonomies(self.lat, errors)
        assert syndrome.loop_x == pytest.approx(0.4)
        assert syndrome.loop_y == 0.0

    def test_wrong_length(self) -> None:
        with pytest.raises(ValueError, match="edge phases"):
            holonomies(self.lat, np.zeros(5))

    def test_statistics_grow_with_noise(self) -> None:
        rng = np.random.default_rng(4)
        quiet = syndrome_statistics(self.lat, 0.05, rng, samples=50)
        loud = syndrome_statistics(self.lat, 2.0, rng, samples=50)
        assert quiet.samples == 50
        assert quiet.mean_abs_face < loud.mean_abs_face
        assert quiet.fraction_above < loud.fraction_above
        assert loud.max_abs_face <= math.pi


# ============================================================================
# Relative fidelity
# ============================================================================

class TestFidelity:
    def test_untwisted_ratio_is_one(self) -> None:
        point = rel_fidelity(3, 1.0, 0.0, cutoff=6)
        assert point.r == pytest.approx(1.0, abs=1e-12)
        assert point.chi_f > 0.0

    def test_symmetric_and_periodic(self) -> None:
        r = rel_fidelity(3, 0.8, 0.6, cutoff=6).r
        assert rel_fidelity(3, 0.8, -0.6, cutoff=6).r == pytest.approx(r, rel=1e-10)
        assert rel_fidelity(3, 0.8, 0.6 + 2 * math.pi, cutoff=6).r == pytest.approx(r, rel=1e-10)
        assert 0.0 < r < 1.0

    def test_curve_matches_pointwise(self) -> None:
        curve = fidelity_curve(3, 0.8, [0.0, 0.4, 1.0], cutoff=6)
        assert curve.ln_r[0] == pytest.approx(0.0, abs=1e-12)
        point = rel_fidelity(3, 0.8, 1.0, cutoff=6)
        assert curve.ln_r[2] == pytest.approx(point.ln_r, abs=1e-10)

    def test_gaussian_law_at_small_twist(self) -> None:
        curve = fidelity_curve(4, 0.4, [0.1, 0.2, 0.3], cutoff=5)
        assert max(gaussian_law_deviation(curve)) < 0.1

    def test_stiffness_from_fidelity(self) -> None:
        curve = fidelity_curve(4, 0.8, [0.05, 0.1, 0.15, 0.2], cutoff=5)
        rho = fidelity_stiffness(curve)
        assert rho == pytest.approx(stiffness_exact(4, 1.25, cutoff=5), rel=0.05)
        with pytest.raises(ValueError, match="no nonzero twist"):
            fidelity_stiffness(curve, max_phi=0.01)


# ============================================================================
# Resilience order parameter
# ============================================================================

class TestLambdaGaussian:
    def test_no_stiffness_means_no_resilience(self) -> None:
        result = lambda_gaussian(0.0, 0.5)
        assert result.lam == 0.0
        assert result.normalization == pytest.approx(2 * math.pi)

    @pytest.mark.parametrize(
        "rho, temperature, expected, tol",
        [(0.95, 0.2, 0.90, 0.03), (0.84, 0.5, 0.75, 0.04)],
    )
    def test_reference_values(
        self, rho: float, temperature: float, expected: float, tol: float
    ) -> None:
        result = lambda_gaussian(rho, temperature, d=2, size=64)
        assert result.lam == pytest.approx(expected, abs=tol)
        assert result.mode is ResilienceMode.GAUSSIAN

    def test_strong_stiffness_limit(self) -> None:
        a = 200.0
        lam = lambda_gaussian(a, 1.0).lam
        assert lam == pytest.approx(math.exp(-1.0 / (2.0 * a)), rel=1e-6)
        assert lam < 1.0

    def test_domain(self) -> None:
        with pytest.raises(DomainError, match="non-negative"):
            lambda_gaussian(-0.1, 0.5)
        with pytest.raises(DomainError):
            lambda_gaussian(0.5, 0.0)
        with pytest.raises(DomainError):
            lambda_gaussian(0.5, 0.5, d=1)

    def test_size_scan_in_three_dimensions(self) -> None:
        scan = lambda_size_scan(0.3, 1.0, 3, [2, 8, 32, 128, 512])
        values = [r.lam for r in scan]
        assert values == sorted(values)
        assert values[-1] > 0.99
        assert all(r.d == 3 for r in scan)

    def test_size_independent_in_two_dimensions(self) -> None:
        scan = lambda_size_scan(0.6, 0.5, 2, [4, 64])
        assert scan[0].lam == pytest.approx(scan[1].lam, rel=1e-12)


class TestLambdaSweep:
    def setup_method(self) -> None:
        self.temps = [0.1, 0.3, 0.5, 0.7, 0.9, 1.1]
        self.table = _table(self.temps, [0.98, 0.92, 0.84, 0.7, 0.4, 0.05], err=0.01)

    def test_decreasing_with_noise(self) -> None:
        sigmas = np.linspace(0.1, 1.1, 11)
        results = lambda_sweep(self.table, sigmas)
        lams = [r.lam for r in results]
        assert all(b <= a + 1e-12 for a, b in zip(lams, lams[1:], strict=False))
        assert all(r.error >= 0.0 for r in results)
        assert results[0].error > 0.0

    def test_thermodynamic_mode_needs_no_coverage(self) -> None:
        short = _table([0.1, 0.5, 0.85], [0.98, 0.84, 0.6])
        results = lambda_sweep(short, [0.5, 1.0, 1.5], mode=LimitMode.THERMODYNAMIC)
        assert results[0].lam > 0.5
        assert results[1].lam == 0.0
        assert results[2].lam == 0.0

    def test_finite_mode_requires_coverage(self) -> None:
        with pytest.raises(BracketingError, match="outside the stiffness table"):
            lambda_sweep(self.table, [1.5])

    def test_negative_stiffness_clamped(self, caplog: pytest.LogCaptureFixture) -> None:
        table = _table([0.5, 1.0, 1.5], [0.5, -0.02, -0.05])
        with caplog.at_level(logging.WARNING):
            results = lambda_sweep(table, [1.2])
        assert results[0].lam == 0.0
        assert results[0].rho_s == 0.0
        assert "Clamped negative stiffness" in caplog.text

    def test_table_from_csv(self, tmp_path: Path) -> None:
        path = tmp_path / "stiffness.csv"
        pd.DataFrame({"T": [0.9, 0.5], "rho_s": [0.4, 0.84]}).to_csv(path, index=False)
        table = StiffnessTable.from_csv(path)
        assert list(table.temperatures) == [0.5, 0.9]
        assert list(table.rho_err) == [0.0, 0.0]
        assert table.covers(0.7)
        assert not table.covers(1.0)


class TestLambdaExact:
    def test_bounds_and_mode(self) -> None:
        result = lambda_exact(3, 0.5, grid=128, cutoff=7)
        assert 0.0 < result.lam < 1.0
        assert result.mode is ResilienceMode.EXACT
        assert result.rho_s > 0.0

    def test_more_noise_less_resilience(self) -> None:
        quiet = lambda_exact(3, 0.3, cutoff=7).lam
        loud = lambda_exact(3, 2.0, cutoff=7).lam
        assert loud < quiet

    def test_close_to_gaussian_weight_at_low_noise(self) -> None:
        exact = lambda_exact(4, 0.3, cutoff=5)
        gaussian = lambda_gaussian(exact.rho_s, 0.3, d=2, size=4)
        assert exact.lam == pytest.approx(gaussian.lam, abs=0.05)

    def test_grid_minimum(self) -> None:
        with pytest.raises(DomainError, match="at least 64"):
            lambda_exact(3, 0.5, grid=32)
