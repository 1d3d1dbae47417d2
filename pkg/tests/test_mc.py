"""Tests for the XY Monte Carlo engine and the stiffness estimators."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from rotorxy.analysis.binning import bin_series, jackknife
from rotorxy.core.engine import SweepEngine
from rotorxy.core.lattice import build_torus
from rotorxy.core.models import Algorithm, EstimatorKind, MCParams, StartMode
from rotorxy.errors import DomainError, InsufficientDataError
from rotorxy.exact.dual import energy_exact, stiffness_exact
from rotorxy.mc.simulation import (
    SERIES_COLUMNS,
    ObservableSeries,
    SpinConfig,
    point_rng,
    run,
    wolff_update,
)
from rotorxy.mc.stiffness import energy_estimate, stiffness_boundary, stiffness_distributed


def _short(**overrides: object) -> MCParams:
    values: dict[str, object] = {
        "size": 4, "temperature": 0.9, "sweeps": 2000, "therm": 200, "stride": 2, "seed": 5,
    }
    values.update(overrides)
    return MCParams.model_validate(values)


class TestMCParams:
    def test_defaults(self) -> None:
        params = MCParams(size=8, temperature=0.5)
        assert params.beta == 2.0
        assert params.resolved_therm == 10_000
        assert params.resolved_start is StartMode.COLD
        assert params.algorithm is Algorithm.METROPOLIS_OVERRELAX
        assert MCParams(size=8, temperature=1.5).resolved_start is StartMode.HOT

    def test_minimum_thermalization(self) -> None:
        assert MCParams(size=4, temperature=1.0, sweeps=500).resolved_therm == 1000

    @pytest.mark.parametrize(
        "field, value",
        [("size", 0), ("temperature", 0.0), ("sweeps", 0), ("stride", 0), ("width", 4.0)],
    )
    def test_validation(self, field: str, value: float) -> None:
        values: dict[str, object] = {"size": 4, "temperature": 1.0, field: value}
        with pytest.raises(ValidationError, match=field):
            MCParams.model_validate(values)


class TestSpinConfig:
    def setup_method(self) -> None:
        self.lat = build_torus(4)
        self.rng = np.random.default_rng(3)

    def test_cold_start_energy(self) -> None:
        spins = SpinConfig.cold(self.lat)
        assert spins.energy() == -32.0
        energy, xc, xs, bc, bs, mx, my = spins.observables()
        assert energy == -32.0
        assert xc == 16.0 and xs == 0.0
        assert bc == 4.0 and bs == 0.0
        assert (mx, my) == (16.0, 0.0)

    def test_angles_reduced(self) -> None:
        spins = SpinConfig(self.lat, np.full(16, -1.0))
        assert np.all((spins.theta >= 0.0) & (spins.theta < 2 * math.pi))

    def test_rejects_nonfinite(self) -> None:
        theta = np.zeros(16)
        theta[3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            SpinConfig(self.lat, theta)

    def test_global_rotation(self) -> None:
        spins = SpinConfig.hot(self.lat, self.rng)
        turned = spins.rotated(0.7)
        assert turned.energy() == pytest.approx(spins.energy(), abs=1e-12)
        a, b = spins.observables(), turned.observables()
        assert b[1] == pytest.approx(a[1], abs=1e-12)
        assert b[3] == pytest.approx(a[3], abs=1e-12)
        mx, my = spins.magnetization()
        c, s = math.cos(0.7), math.sin(0.7)
        assert turned.magnetization() == pytest.approx((c * mx - s * my, s * mx + c * my))


class TestWolff:
    def test_requires_positive_beta(self) -> None:
        spins = SpinConfig.cold(build_torus(4))
        with pytest.raises(DomainError):
            wolff_update(spins, 0.0, np.random.default_rng(0))

    def test_low_temperature_clusters_span(self) -> None:
        lat = build_torus(8)
        spins = SpinConfig.cold(lat)
        rng = np.random.default_rng(1)
        sizes = [wolff_update(spins, 10.0, rng) for _ in range(30)]
        assert sum(s == lat.n_vertices for s in sizes) >= 10

    def test_high_temperature_clusters_small(self) -> None:
        lat = build_torus(8)
        rng = np.random.default_rng(2)
        spins = SpinConfig.hot(lat, rng)
        sizes = [wolff_update(spins, 0.01, rng) for _ in range(500)]
        assert np.mean(sizes) < 1.5

    def test_energy_rotation_invariant_after_update(self) -> None:
        lat = build_torus(6)
        rng = np.random.default_rng(4)
        spins = SpinConfig.hot(lat, rng)
        wolff_update(spins, 1.0, rng)
        assert spins.rotated(1.3).energy() == pytest.approx(spins.energy(), abs=1e-12)


class TestSimulation:
    def test_series_shape(self) -> None:
        series = run(_short())
        assert len(series) == 1000
        assert series["sweep"][0] == 2.0
        assert list(series.to_frame().columns) == list(SERIES_COLUMNS)

    def test_deterministic(self) -> None:
        a = run(_short()).to_frame()
        b = run(_short()).to_frame()
        assert a.equals(b)

    def test_point_index_changes_stream(self) -> None:
        a = run(_short(point_index=0))
        b = run(_short(point_index=1))
        assert not np.array_equal(a["energy"], b["energy"])

    def test_point_rng_streams(self) -> None:
        assert point_rng(1, 0).random() == point_rng(1, 0).random()
        assert point_rng(1, 0).random() != point_rng(1, 1).random()

    def test_width_tuning(self) -> None:
        series = run(_short(temperature=0.3, width=math.pi, therm=2000))
        assert 0.0 < series.final_width < math.pi
        assert 0.25 < series.acceptance_rate < 0.75

    def test_wolff_chain(self) -> None:
        series = run(_short(algorithm=Algorithm.WOLFF))
        assert series.mean_cluster_size >= 1.0
        assert math.isnan(series.acceptance_rate)

    def test_frame_round_trip_keeps_columns(self) -> None:
        series = run(_short())
        back = ObservableSeries.from_frame(series.to_frame())
        np.testing.assert_array_equal(back["cut_sin"], series["cut_sin"])
        with pytest.raises(ValueError, match="missing columns"):
            ObservableSeries.from_frame(series.to_frame().drop(columns=["mag_y"]))

    def test_infinite_temperature_proxy(self) -> None:
        params = _short(temperature=1e6, size=8, sweeps=20_000, start=StartMode.HOT)
        series = run(params)
        mean, err = energy_estimate(series)
        assert abs(mean) < 3.0 * err
        rho = stiffness_distributed(series, params.beta, params.size)
        assert abs(rho.rho_s) < 3.0 * rho.error + 1e-5

    def test_sin_sums_vanish(self) -> None:
        series = run(_short(temperature=0.7, sweeps=20_000))
        for column in ("xbond_sin", "cut_sin"):
            mean, err = jackknife(bin_series(series[column]))
            assert abs(mean) < 3.0 * err


class TestEstimators:
    def setup_method(self) -> None:
        self.params = _short(sweeps=4000)
        self.series = run(self.params)

    def test_kinds(self) -> None:
        d = stiffness_distributed(self.series, self.params.beta, 4)
        b = stiffness_boundary(self.series, self.params.beta, 4)
        assert d.kind is EstimatorKind.DISTRIBUTED
        assert b.kind is EstimatorKind.BOUNDARY
        assert d.error >= 0.0 and b.error >= 0.0
        assert d.n_bins == 50

    def test_ingredients(self) -> None:
        d = stiffness_distributed(self.series, self.params.beta, 4)
        assert d.e_dir == pytest.approx(self.series["xbond_cos"].mean(), rel=0.01)
        expected = (d.e_dir - self.params.beta * (d.i_dir2 - d.i_dir**2)) / 16
        assert d.rho_s == pytest.approx(expected, rel=1e-10)

    def test_empty_series(self) -> None:
        empty = ObservableSeries(columns={c: np.empty(0) for c in SERIES_COLUMNS})
        with pytest.raises(InsufficientDataError):
            stiffness_distributed(empty, 1.0, 4)
        with pytest.raises(InsufficientDataError):
            energy_estimate(empty)


@pytest.mark.slow
class TestAgainstExact:
    """Long chains checked against the transfer-matrix values."""

    def test_energy_and_stiffness_l4(self) -> None:
        beta = 1.25
        params = MCParams(size=4, temperature=0.8, sweeps=100_000, seed=11)
        series = run(params)
        e_mc, e_err = energy_estimate(series)
        e_exact = energy_exact(4, beta, cutoff=5)
        assert abs(e_mc - e_exact) < 3.0 * e_err

        rho_exact = stiffness_exact(4, beta, cutoff=5)
        for estimate in (
            stiffness_distributed(series, beta, 4),
            stiffness_boundary(series, beta, 4),
        ):
            assert abs(estimate.rho_s - rho_exact) < 3.0 * estimate.error

    def test_wolff_agrees_with_exact(self) -> None:
        beta = 1.25
        params = MCParams(size=4, temperature=0.8, sweeps=50_000, seed=12,
                          algorithm=Algorithm.WOLFF)
        series = run(params)
        rho = stiffness_distributed(series, beta, 4)
        assert abs(rho.rho_s - stiffness_exact(4, beta, cutoff=5)) < 3.0 * rho.error

    @pytest.mark.parametrize("temperature", [0.5, 0.7, 1.1])
    def test_twist_placements_agree(self, temperature: float) -> None:
        params = MCParams(size=8, temperature=temperature, sweeps=100_000, seed=13)
        series = run(params)
        d = stiffness_distributed(series, params.beta, 8)
        b = stiffness_boundary(series, params.beta, 8)
        assert abs(d.rho_s - b.rho_s) < 3.0 * math.hypot(d.error, b.error)


@pytest.mark.slow
class TestSweepShape:
    def test_stiffness_quasi_monotone_across_sweep(self) -> None:
        engine = SweepEngine(workers=1)
        base = MCParams(size=8, temperature=0.4, sweeps=40_000, seed=14)
        result = engine.sweep(base, [0.4, 0.6, 0.8, 1.0, 1.2, 1.4])
        frame = result.stiffness_frame()
        rho, err = frame["rho_s"].to_numpy(), frame["rho_s_err"].to_numpy()
        for i in range(len(rho) - 1):
            assert rho[i + 1] <= rho[i] + 3.0 * math.hypot(err[i], err[i + 1])
        assert rho[0] > rho[-1]
