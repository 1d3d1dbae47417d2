"""End-to-end tests of the command-line surface through ``rotorxy.cli.main``."""

import json
from pathlib import Path

import pandas as pd
import pytest

import rotorxy.rotor.resilience as resilience
from rotorxy.cli import LAMBDA_COLUMNS, main
from rotorxy.core.engine import STIFFNESS_COLUMNS
from rotorxy.core.models import MCParams, ResilienceResult
from rotorxy.mc.simulation import SERIES_COLUMNS, ObservableSeries, XYSimulation

SHORT_CHAIN = ["--sweeps", "1000", "--therm", "100", "--seed", "3"]


@pytest.fixture(autouse=True)
def _workspace(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.chdir(tmp_path)
    for name in ("ROTORXY_OUT_DIR", "ROTORXY_WORKERS", "ROTORXY_SEED", "ROTORXY_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def _stiffness_table(path: Path) -> Path:
    pd.DataFrame({
        "T": [0.1, 0.3, 0.5, 0.7, 0.85],
        "rho_s": [0.98, 0.93, 0.84, 0.7, 0.55],
        "rho_s_err": [0.001, 0.002, 0.004, 0.006, 0.01],
    }).to_csv(path, index=False)
    return path


class TestUsageErrors:
    def test_invalid_size(self) -> None:
        assert main(["mc-run", "--size", "0", "--temp", "1.0"]) == 1

    def test_unknown_flag(self) -> None:
        assert main(["mc-run", "--size", "4", "--temp", "1.0", "--bogus"]) == 1

    def test_missing_required(self) -> None:
        assert main(["exact-z", "--size", "2"]) == 1

    def test_missing_config_file(self) -> None:
        assert main(["--config", "absent.yaml", "lattice-check"]) == 1

    def test_enumerate_too_large(self) -> None:
        assert main(["exact-z", "--size", "5", "--beta", "1.0", "--method", "enumerate"]) == 1

    def test_size_needed_without_config(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["mc-run", "--temp", "1.0"]) == 1
        assert "mc.size" in capsys.readouterr().err
        assert main(["stiffness-sweep", "-L", "4", "--tmin", "0.5"]) == 1


class TestBinsCheckedBeforeChain:
    @pytest.fixture
    def chains(self, monkeypatch: pytest.MonkeyPatch) -> list[MCParams]:
        started: list[MCParams] = []
        original = XYSimulation.run

        def recording_run(sim: XYSimulation) -> ObservableSeries:
            started.append(sim.params)
            return original(sim)

        monkeypatch.setattr(XYSimulation, "run", recording_run)
        return started

    def test_mc_run_too_few_measurements(self, tmp_path: Path, chains: list[MCParams]) -> None:
        args = ["mc-run", "-L", "8", "-T", "0.9", "--sweeps", "90", "--therm", "10", "--out", "r"]
        assert main(args) == 1
        assert chains == []
        assert not (tmp_path / "r" / "series.csv").exists()

    def test_mc_run_too_few_bins(self, chains: list[MCParams]) -> None:
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--bins", "5"]) == 1
        assert chains == []

    def test_sweep_too_few_measurements(self, tmp_path: Path, chains: list[MCParams]) -> None:
        args = [
            "stiffness-sweep", "-L", "4", "--tmin", "0.6", "--tmax", "1.0", "--steps", "3",
            "--sweeps", "60", "--therm", "10", "--out", "s",
        ]
        assert main(args) == 1
        assert chains == []
        assert not (tmp_path / "s").exists()

    def test_enough_measurements_runs_once(self, chains: list[MCParams]) -> None:
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--out", "r"]) == 0
        assert len(chains) == 1


class TestLatticeCheck:
    def test_dump(self, tmp_path: Path) -> None:
        dump = tmp_path / "incidence.csv"
        assert main(["lattice-check", "--size", "4", "--dump", str(dump)]) == 0
        frame = pd.read_csv(dump)
        assert len(frame) == 32
        assert list(frame.columns) == ["edge_id", "start", "end", "axis", "f_plus", "f_minus"]


class TestExactZ:
    def test_prints_json(self, capsys: pytest.CaptureFixture[str]) -> None:
        code = main(["exact-z", "--size", "2", "--beta", "1.0", "--method", "enumerate"])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["method"] == "enumerate"
        assert record["converged"] is True
        assert record["lnZ"] == pytest.approx(record["lnZ_phi"])

    def test_twist_and_out(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        out = tmp_path / "z.json"
        args = [
            "exact-z", "-L", "3", "--beta", "0.8", "-Q", "6", "--twist", "0.5", "--out", str(out),
        ]
        assert main(args) == 0
        printed = json.loads(capsys.readouterr().out)
        stored = json.loads(out.read_text(encoding="utf-8"))
        assert stored["lnZ_phi"] == pytest.approx(printed["lnZ_phi"])
        assert stored["lnZ_phi"] < stored["lnZ"]
        assert stored["cutoff"] == 6


class TestVerifyMapping:
    def test_subset_passes(self, tmp_path: Path) -> None:
        args = [
            "verify-mapping", "--only", "lattice_algebra",
            "--only", "von_mises_normalization", "--out", str(tmp_path / "v"),
        ]
        assert main(args) == 0
        record = json.loads((tmp_path / "v" / "verify.json").read_text(encoding="utf-8"))
        assert record["passed"] is True
        assert [c["name"] for c in record["checks"]] == [
            "lattice_algebra", "von_mises_normalization",
        ]
        assert record["command"] == "verify-mapping"

    def test_unknown_check(self) -> None:
        assert main(["verify-mapping", "--only", "no_such_check"]) == 1


class TestMonteCarloCommands:
    def test_mc_run_writes_series_and_meta(self, tmp_path: Path) -> None:
        out = tmp_path / "run"
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--out", str(out)]) == 0
        series = pd.read_csv(out / "series.csv")
        assert list(series.columns) == list(SERIES_COLUMNS)
        assert len(series) == 500
        meta = json.loads((out / "meta.json").read_text(encoding="utf-8"))
        assert meta["command"] == "mc-run"
        assert meta["params"]["params"]["size"] == 4
        assert meta["runtime"]["measurements"] == 500
        assert "distributed" in meta["estimates"]

    def test_mc_run_is_deterministic(self, tmp_path: Path) -> None:
        for name in ("a", "b"):
            assert main(["mc-run", "-L", "4", "-T", "0.7", *SHORT_CHAIN, "--out", name]) == 0
        first = (tmp_path / "a" / "series.csv").read_bytes()
        assert first == (tmp_path / "b" / "series.csv").read_bytes()

    def test_out_dir_from_environment(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("ROTORXY_OUT_DIR", str(tmp_path / "env_out"))
        assert main(["mc-run", "-L", "4", "-T", "1.0", *SHORT_CHAIN]) == 0
        assert (tmp_path / "env_out" / "series.csv").exists()

    def test_analyze_run_directory(self, tmp_path: Path) -> None:
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--out", "run"]) == 0
        assert main(["analyze", "run", "--bins", "20"]) == 0
        frame = pd.read_csv(tmp_path / "run" / "stiffness.csv")
        assert list(frame.columns) == list(STIFFNESS_COLUMNS)
        assert frame["T"].iloc[0] == 0.9

    def test_analyze_needs_parameters_without_meta(self, tmp_path: Path) -> None:
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--out", "run"]) == 0
        (tmp_path / "run" / "meta.json").unlink()
        assert main(["analyze", "run/series.csv"]) == 1
        assert main(["analyze", "run/series.csv", "-L", "4", "-T", "0.9"]) == 0

    def test_stiffness_sweep(self, tmp_path: Path) -> None:
        args = [
            "stiffness-sweep", "-L", "4", "--tmin", "0.6", "--tmax", "1.2", "--steps", "3",
            *SHORT_CHAIN, "--out", "sweep", "--svg",
        ]
        assert main(args) == 0
        frame = pd.read_csv(tmp_path / "sweep" / "stiffness.csv")
        assert list(frame.columns) == list(STIFFNESS_COLUMNS)
        assert list(frame["T"]) == pytest.approx([0.6, 0.9, 1.2])
        assert (tmp_path / "sweep" / "stiffness.svg").exists()
        meta = json.loads((tmp_path / "sweep" / "meta.json").read_text(encoding="utf-8"))
        assert len(meta["runtime"]["points"]) == 3
        assert "kt_crossing" in meta

    def test_sweep_rejects_bad_grid(self) -> None:
        args = ["stiffness-sweep", "-L", "4", "--tmin", "0.0", "--tmax", "1.0", "--steps", "3"]
        assert main(args) == 1

    @pytest.mark.slow
    def test_sweep_independent_of_worker_count(self, tmp_path: Path) -> None:
        common = [
            "stiffness-sweep", "-L", "4", "--tmin", "0.7", "--tmax", "1.1", "--steps", "3",
            *SHORT_CHAIN,
        ]
        assert main([*common, "--workers", "1", "--out", "one"]) == 0
        assert main([*common, "--workers", "2", "--out", "two"]) == 0
        one = (tmp_path / "one" / "stiffness.csv").read_bytes()
        assert one == (tmp_path / "two" / "stiffness.csv").read_bytes()


class TestLambdaSweep:
    def test_thermodynamic_mode(self, tmp_path: Path) -> None:
        table = _stiffness_table(tmp_path / "stiffness.csv")
        args = [
            "lambda-sweep", "--stiffness-file", str(table), "--sigma-min", "0.1",
            "--sigma-max", "1.2", "--steps", "12", "--mode", "thermo", "--out", "lam", "--svg",
        ]
        assert main(args) == 0
        frame = pd.read_csv(tmp_path / "lam" / "lambda.csv")
        assert list(frame.columns) == LAMBDA_COLUMNS
        assert len(frame) == 12
        above = frame[frame["sigma"] > 0.89]
        assert (above["lambda"] == 0.0).all()
        assert frame["lambda"].iloc[0] > 0.9
        assert (tmp_path / "lam" / "lambda.svg").exists()
        assert (tmp_path / "lam" / "lambda.meta.json").exists()

    def test_finite_mode_outside_table(self, tmp_path: Path) -> None:
        table = _stiffness_table(tmp_path / "stiffness.csv")
        args = ["lambda-sweep", "--stiffness-file", str(table), "--sigma-max", "1.2"]
        assert main(args) == 1

    def test_requires_stiffness_file(self) -> None:
        assert main(["lambda-sweep"]) == 1

    def test_exact_ratio_weight(self, tmp_path: Path) -> None:
        args = [
            "lambda-sweep", "--weight", "exact-ratio", "-L", "2", "--sigma-min", "0.5",
            "--sigma-max", "1.0", "--steps", "2", "--out", "ex",
        ]
        assert main(args) == 0
        frame = pd.read_csv(tmp_path / "ex" / "lambda.csv")
        assert frame["lambda"].iloc[0] > frame["lambda"].iloc[1] > 0.0


class TestInit:
    def test_creates_and_protects(self, tmp_path: Path) -> None:
        assert main(["init"]) == 0
        assert (tmp_path / "rotorxy.yaml").exists()
        assert main(["init"]) == 1
        assert main(["init", "--force"]) == 0

    def test_generated_file_is_loadable(self, tmp_path: Path) -> None:
        assert main(["init", "--path", "cfg.yaml"]) == 0
        assert main(["--config", "cfg.yaml", "lattice-check", "-L", "2"]) == 0


class TestConfigFileReplacesFlags:
    def _write(self, tmp_path: Path, payload: dict[str, object]) -> str:
        path = tmp_path / "run.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    def test_mc_run_from_config_alone(self, tmp_path: Path) -> None:
        config = self._write(tmp_path, {
            "mc": {"size": 4, "temperature": 0.9, "sweeps": 1000, "therm": 100, "seed": 3},
            "output": {"out_dir": "cfg_run"},
        })
        assert main(["--config", config, "mc-run"]) == 0
        assert len(pd.read_csv(tmp_path / "cfg_run" / "series.csv")) == 500
        meta = json.loads((tmp_path / "cfg_run" / "meta.json").read_text(encoding="utf-8"))
        assert meta["params"]["params"]["size"] == 4
        assert meta["params"]["params"]["temperature"] == 0.9
        assert meta["bins"] == 50

    def test_flags_win_over_config(self, tmp_path: Path) -> None:
        config = self._write(tmp_path, {
            "mc": {"size": 4, "temperature": 0.9, "sweeps": 1000, "therm": 100},
        })
        assert main(["--config", config, "mc-run", "-T", "0.7", "--out", "flag"]) == 0
        meta = json.loads((tmp_path / "flag" / "meta.json").read_text(encoding="utf-8"))
        assert meta["params"]["params"]["temperature"] == 0.7

    def test_sweep_grid_from_config(self, tmp_path: Path) -> None:
        config = self._write(tmp_path, {
            "mc": {"size": 4, "sweeps": 1000, "therm": 100, "seed": 3},
            "sweep": {"tmin": 0.6, "tmax": 1.0, "steps": 2},
        })
        assert main(["--config", config, "stiffness-sweep", "--out", "sw"]) == 0
        frame = pd.read_csv(tmp_path / "sw" / "stiffness.csv")
        assert list(frame["T"]) == pytest.approx([0.6, 1.0])

    def test_lambda_grid_and_quadrature_tolerance_from_config(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        tolerances: list[float] = []
        original = resilience.lambda_gaussian

        def recording_gaussian(*args: float, epsabs: float = 1e-8) -> ResilienceResult:
            tolerances.append(epsabs)
            return original(*args, epsabs=epsabs)

        monkeypatch.setattr(resilience, "lambda_gaussian", recording_gaussian)
        table = _stiffness_table(tmp_path / "stiffness.csv")
        config = self._write(tmp_path, {
            "resilience": {"sigma_min": 0.2, "sigma_max": 0.6, "steps": 3, "quad_epsabs": 1e-6},
        })
        args = ["--config", config, "lambda-sweep", "--stiffness-file", str(table), "--out", "lam"]
        assert main(args) == 0
        frame = pd.read_csv(tmp_path / "lam" / "lambda.csv")
        assert list(frame["sigma"]) == pytest.approx([0.2, 0.4, 0.6])
        assert tolerances and set(tolerances) == {1e-6}
        meta = json.loads((tmp_path / "lam" / "lambda.meta.json").read_text(encoding="utf-8"))
        assert meta["params"]["params"]["quad_epsabs"] == 1e-6


class TestSidecars:
    def test_lattice_dump_sidecar(self, tmp_path: Path) -> None:
        assert main(["lattice-check", "-L", "3", "--dump", "inc.csv"]) == 0
        meta = json.loads((tmp_path / "inc.meta.json").read_text(encoding="utf-8"))
        assert meta["artifact"] == "rotorxy"
        assert meta["version"]
        assert meta["command"] == "lattice-check"
        assert meta["params"]["size"] == 3
        assert meta["passed"] is True

    def test_analyze_sidecar_records_bins(self, tmp_path: Path) -> None:
        assert main(["mc-run", "-L", "4", "-T", "0.9", *SHORT_CHAIN, "--out", "run"]) == 0
        assert main(["analyze", "run", "--bins", "20"]) == 0
        meta = json.loads((tmp_path / "run" / "analyze.meta.json").read_text(encoding="utf-8"))
        assert meta["command"] == "analyze"
        assert meta["params"]["bins"] == 20
        assert meta["params"]["params"]["size"] == 4
        assert meta["runtime"]["measurements"] == 500


class TestListingAndSummaries:
    def test_verify_list(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["verify-mapping", "--list"]) == 0
        out = capsys.readouterr().out
        assert "lattice_algebra" in out
        assert "Oracle checks" in out

    def test_sweep_prints_metrics_summary(self, capsys: pytest.CaptureFixture[str]) -> None:
        args = [
            "stiffness-sweep", "-L", "4", "--tmin", "0.8", "--tmax", "0.8", "--steps", "1",
            *SHORT_CHAIN, "--out", "sw",
        ]
        assert main(args) == 0
        assert "=== Sweep Metrics ===" in capsys.readouterr().out
