"""
rotorxy CLI: XY-model Monte Carlo, exact dual sums and toric-rotor resilience curves.

Usage:
    rotorxy lattice-check --size 4 --dump incidence.csv
    rotorxy mc-run --size 16 --temp 0.7 --sweeps 100000 --seed 1 --out runs/t07
    rotorxy stiffness-sweep --size 64 --tmin 0.6 --tmax 1.2 --steps 25 --workers 8 --svg
    rotorxy exact-z --size 3 --beta 1.0 --twist 0.3 --method transfer
    rotorxy verify-mapping --size 2
    rotorxy lambda-sweep --stiffness-file results/stiffness.csv --mode thermo --svg
    rotorxy analyze runs/t07

Exit codes: 0 success, 1 usage or validation error, 2 failed verification.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from rotorxy.analysis.binning import DEFAULT_BINS, binning_curve, check_bin_count
from rotorxy.analysis.crossing import JUMP_SLOPE
from rotorxy.core.engine import SweepEngine, analyze_series, run_point, temperature_grid
from rotorxy.core.lattice import build_torus, check_code_algebra
from rotorxy.core.models import (
    Algorithm,
    DualMethod,
    DualSumSpec,
    LimitMode,
    MCParams,
    ResilienceMode,
    RunConfig,
    StartMode,
)
from rotorxy.errors import RotorXYError, VerificationFailure
from rotorxy.exact.dual import evaluate
from rotorxy.mc.simulation import ObservableSeries
from rotorxy.rotor.resilience import StiffnessTable, lambda_exact, lambda_sweep
from rotorxy.utils.config import DEFAULT_CONFIG_FILE, RotorXYConfig
from rotorxy.utils.log import setup_logging
from rotorxy.utils.output import build_meta, write_csv, write_json, write_line_plot
from rotorxy.verification.builtins import default_registry
from rotorxy.verification.registry import VerificationContext

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

LAMBDA_COLUMNS = ["sigma", "lambda", "lambda_err", "rho_s_used"]


@click.group()
@click.version_option(package_name="rotorxy")
@click.option(
    "--config", "config_path", default=None,
    help=f"YAML/JSON config (default: {DEFAULT_CONFIG_FILE} if present)",
)
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, log_level: str | None) -> None:
    """rotorxy: XY-model stiffness and the phase-noise resilience of the toric-rotor code."""
    config = RotorXYConfig.load(config_path)
    if log_level:
        config.logging.level = log_level
    setup_logging(config.logging.level)
    ctx.obj = config


def main(argv: list[str] | None = None) -> int:
    """Console entry point; returns the process exit code."""
    try:
        rv = cli.main(args=argv, prog_name="rotorxy", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        err_console.print("[yellow]Interrupted.[/yellow]")
        return 1
    except ValidationError as exc:
        err_console.print(f"[red]Invalid parameters:[/red] {escape(str(exc))}")
        return 1
    except VerificationFailure as exc:
        err_console.print(f"[red]Verification failed:[/red] {escape(str(exc))}")
        return 2
    except (RotorXYError, ValueError) as exc:
        err_console.print(f"[red]Error:[/red] {escape(str(exc))}")
        return 1
    return rv if isinstance(rv, int) else 0


def _out_dir(config: RotorXYConfig, out: str | None) -> Path:
    return Path(out if out is not None else config.output.out_dir)


def _pick(value: Any, default: Any) -> Any:
    return default if value is None else value


def _require(value: Any, default: Any, flag: str, key: str) -> Any:
    """Flag value, else the config value; one of them must be set."""
    resolved = _pick(value, default)
    if resolved is None:
        raise click.UsageError(f"{flag} is required unless {key} is set in the config file")
    return resolved


def _mc_params(
    config: RotorXYConfig,
    *,
    size: int,
    temperature: float,
    sweeps: int | None,
    therm: int | None,
    stride: int | None,
    algo: str | None,
    width: float | None,
    seed: int | None,
    start: str | None,
) -> MCParams:
    mc = config.mc
    return MCParams(
        size=size,
        temperature=temperature,
        sweeps=_pick(sweeps, mc.sweeps),
        therm=_pick(therm, mc.therm),
        stride=_pick(stride, mc.stride),
        algorithm=Algorithm(_pick(algo, mc.algorithm)),
        width=_pick(width, mc.width),
        seed=_pick(seed, mc.seed),
        start=StartMode(start) if start else None,
    )


def _mc_options(fn: Any) -> Any:
    """Chain options shared by ``mc-run`` and ``stiffness-sweep``."""
    options = [
        click.option("--sweeps", type=int, default=None, help="Measurement sweeps per point"),
        click.option("--therm", type=int, default=None, help="Thermalization sweeps"),
        click.option("--stride", type=int, default=None, help="Sweeps between measurements"),
        click.option("--algo", type=click.Choice([a.value for a in Algorithm]), default=None),
        click.option("--width", type=float, default=None, help="Initial Metropolis proposal width"),
        click.option("--seed", type=int, default=None, help="Master seed"),
        click.option("--start", type=click.Choice([s.value for s in StartMode]), default=None),
        click.option("--bins", type=int, default=DEFAULT_BINS, show_default=True),
        click.option("--out", default=None, help="Output directory"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


# ---------------------------------------------------------------------------
# lattice-check
# ---------------------------------------------------------------------------


@cli.command("lattice-check")
@click.option("--size", "-L", type=int, default=4, show_default=True)
@click.option("--dump", default=None, help="Write the incidence table to this CSV file")
def lattice_check(size: int, dump: str | None) -> None:
    """Check stabilizer commutation, logical crossings and redundancy on an L x L torus."""
    lattice = build_torus(size)
    report = check_code_algebra(lattice)

    table = Table(title=f"Code algebra, L={size}", show_lines=False)
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Detail", style="dim")
    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        detail = f"{len(check.violations)} violation(s)" if check.violations else ""
        table.add_row(check.name, status, detail)
    console.print(table)

    if dump:
        dump_path = Path(dump)
        write_csv(dump_path, lattice.incidence_frame())
        write_json(dump_path.with_suffix(".meta.json"), build_meta(
            "lattice-check",
            {"size": size, "dump": str(dump_path)},
            passed=report.passed,
            checks=[check.name for check in report.checks],
        ))
        console.print(f"[green]Incidence table written to {dump}[/green]")
    if not report.passed:
        raise VerificationFailure(f"{len(report.failures())} lattice check(s) failed")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@cli.command("mc-run")
@click.option("--size", "-L", type=int, default=None, help="Lattice size (config: mc.size)")
@click.option("--temp", "-T", type=float, default=None,
              help="Temperature (config: mc.temperature)")
@_mc_options
@click.pass_obj
def mc_run(
    config: RotorXYConfig,
    size: int | None,
    temp: float | None,
    sweeps: int | None,
    therm: int | None,
    stride: int | None,
    algo: str | None,
    width: float | None,
    seed: int | None,
    start: str | None,
    bins: int,
    out: str | None,
) -> None:
    """Run one chain and write series.csv and meta.json."""
    params = _mc_params(
        config,
        size=_require(size, config.mc.size, "--size", "mc.size"),
        temperature=_require(temp, config.mc.temperature, "--temp", "mc.temperature"),
        sweeps=sweeps, therm=therm, stride=stride, algo=algo, width=width, seed=seed,
        start=start,
    )
    check_bin_count(params.n_measurements, bins)
    run_config = RunConfig(
        command="mc-run", params=params.model_dump(mode="json"), seed=params.seed,
        out_dir=_out_dir(config, out),
    )

    result = run_point(params, n_bins=bins, keep_series=True)
    assert result.series is not None
    out_dir = run_config.out_dir
    write_csv(out_dir / "series.csv", result.series.to_frame())
    write_json(out_dir / "meta.json", build_meta(
        "mc-run",
        run_config.model_dump(mode="json"),
        runtime=result.metrics.to_dict(),
        bins=bins,
        estimates={
            "distributed": result.distributed.model_dump(mode="json"),
            "boundary": result.boundary.model_dump(mode="json"),
            "energy": list(result.energy),
        },
    ))
    _display_point(result.row(), out_dir)


@cli.command("stiffness-sweep")
@click.option("--size", "-L", type=int, default=None, help="Lattice size (config: mc.size)")
@click.option("--tmin", type=float, default=None, help="Lowest temperature (config: sweep.tmin)")
@click.option("--tmax", type=float, default=None, help="Highest temperature (config: sweep.tmax)")
@click.option("--steps", type=int, default=None, help="Grid points (config: sweep.steps, 25)")
@click.option("--workers", "-j", type=int, default=None, help="Worker processes")
@click.option("--svg/--no-svg", default=None, help="Also write stiffness.svg")
@_mc_options
@click.pass_obj
def stiffness_sweep(
    config: RotorXYConfig,
    size: int | None,
    tmin: float | None,
    tmax: float | None,
    steps: int | None,
    workers: int | None,
    svg: bool | None,
    sweeps: int | None,
    therm: int | None,
    stride: int | None,
    algo: str | None,
    width: float | None,
    seed: int | None,
    start: str | None,
    bins: int,
    out: str | None,
) -> None:
    """Stiffness over a temperature grid; writes stiffness.csv, meta.json and the KT crossing."""
    size = _require(size, config.mc.size, "--size", "mc.size")
    tmin = _require(tmin, config.sweep.tmin, "--tmin", "sweep.tmin")
    tmax = _require(tmax, config.sweep.tmax, "--tmax", "sweep.tmax")
    base = _mc_params(
        config, size=size, temperature=tmin, sweeps=sweeps, therm=therm, stride=stride,
        algo=algo, width=width, seed=seed, start=start,
    )
    temperatures = temperature_grid(tmin, tmax, _pick(steps, config.sweep.steps))
    for t in temperatures:
        MCParams.model_validate({**base.model_dump(), "temperature": t})
    check_bin_count(base.n_measurements, bins)
    run_config = RunConfig(
        command="stiffness-sweep",
        params={**base.model_dump(mode="json", exclude={"temperature", "point_index"}),
                "temperatures": temperatures, "bins": bins},
        seed=base.seed,
        workers=_pick(workers, config.workers),
        out_dir=_out_dir(config, out),
    )

    engine = SweepEngine(config, workers=run_config.workers, n_bins=bins)
    result = engine.sweep(base, temperatures)
    frame = result.stiffness_frame()
    crossing = result.crossing()

    out_dir = run_config.out_dir
    write_csv(out_dir / "stiffness.csv", frame)
    write_json(out_dir / "meta.json", build_meta(
        "stiffness-sweep",
        run_config.model_dump(mode="json"),
        runtime=result.metrics.to_dict(),
        kt_crossing=crossing.model_dump() if crossing else None,
    ))
    if _pick(svg, config.output.svg):
        _plot_stiffness(out_dir / "stiffness.svg", frame)

    _display_frame(frame, f"Stiffness, L={size}")
    console.print(result.metrics.summary_text(), highlight=False, markup=False)
    if crossing:
        console.print(f"KT crossing T* = {crossing.t_star:.4f} +/- {crossing.error:.4f}")
    console.print(f"[green]Results written to {out_dir}/[/green]")


@cli.command("analyze")
@click.argument("source", type=click.Path(exists=True))
@click.option("--size", "-L", type=int, default=None, help="Needed when meta.json is absent")
@click.option("--temp", "-T", type=float, default=None, help="Needed when meta.json is absent")
@click.option("--bins", type=int, default=DEFAULT_BINS, show_default=True)
@click.option("--out", default=None, help="Output directory (default: next to the series)")
def analyze(
    source: str, size: int | None, temp: float | None, bins: int, out: str | None
) -> None:
    """Re-process an existing series.csv (file or run directory) into stiffness.csv."""
    path = Path(source)
    series_path = path / "series.csv" if path.is_dir() else path
    meta_path = series_path.parent / "meta.json"

    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        params = MCParams.model_validate(meta["params"]["params"])
        if size is not None or temp is not None:
            params = params.model_copy(update={
                "size": _pick(size, params.size), "temperature": _pick(temp, params.temperature),
            })
    elif size is not None and temp is not None:
        params = MCParams(size=size, temperature=temp)
    else:
        raise click.UsageError("no meta.json next to the series; pass --size and --temp")

    series = ObservableSeries.from_frame(pd.read_csv(series_path), params)
    result = analyze_series(series, params, n_bins=bins)
    out_dir = Path(out) if out else series_path.parent
    write_csv(out_dir / "stiffness.csv", pd.DataFrame([result.row()]))
    write_json(out_dir / "analyze.meta.json", build_meta(
        "analyze",
        {
            "source": str(series_path),
            "bins": bins,
            "params": params.model_dump(mode="json"),
        },
        runtime=result.metrics.to_dict(),
    ))

    curve = binning_curve(series["energy"])
    table = Table(title="Energy binning", show_lines=False)
    table.add_column("Bin size", justify="right")
    table.add_column("Std. error", justify="right")
    for bin_size, error in curve:
        table.add_row(str(bin_size), f"{error:.4g}")
    console.print(table)
    console.print(f"tau_int(E) = {result.metrics.tau_int:.2f}")
    _display_point(result.row(), out_dir)


# ---------------------------------------------------------------------------
# Exact evaluation
# ---------------------------------------------------------------------------


@cli.command("exact-z")
@click.option("--size", "-L", type=int, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--cutoff", "-Q", type=int, default=None, help="Current cutoff (default: adaptive)")
@click.option("--twist", type=float, default=0.0, show_default=True)
@click.option("--method", type=click.Choice([m.value for m in DualMethod]), default="transfer")
@click.option("--out", default=None, help="Also write the JSON record to this file")
@click.pass_obj
def exact_z(
    config: RotorXYConfig,
    size: int,
    beta: float,
    cutoff: int | None,
    twist: float,
    method: str,
    out: str | None,
) -> None:
    """Exact ln Z and ln Z_phi on a small torus, printed as JSON."""
    spec = DualSumSpec(size=size, beta=beta, cutoff=cutoff, twist=twist, method=DualMethod(method))
    result = evaluate(
        spec,
        tolerance=config.exact.tolerance,
        max_states=config.exact.max_states,
        grid=config.exact.quad_grid,
    )
    record = result.summary()
    click.echo(json.dumps(record, indent=2))
    if out:
        write_json(out, record)


@cli.command("verify-mapping")
@click.option("--size", "-L", type=int, default=2, show_default=True)
@click.option("--only", multiple=True, help="Run only the named check (repeatable)")
@click.option("--list", "list_only", is_flag=True, help="List the checks and exit")
@click.option("--out", default=None, help="Directory for verify.json")
@click.pass_obj
def verify_mapping(
    config: RotorXYConfig, size: int, only: tuple[str, ...], list_only: bool, out: str | None
) -> None:
    """Run the oracle suite: dual sum, quadrature, transfer, stiffness and fidelity identities."""
    registry = default_registry()
    if list_only:
        listing = Table(title="Oracle checks", show_lines=False)
        listing.add_column("Check", style="cyan")
        listing.add_column("Description")
        listing.add_column("Tags", style="dim")
        for check in registry.list_checks():
            listing.add_row(check.name, check.description, ", ".join(check.tags))
        console.print(listing)
        return
    if size < 2:
        raise click.BadParameter(f"size must be >= 2, got {size}", param_hint="--size")
    unknown = [name for name in only if name not in registry]
    if unknown:
        raise click.BadParameter(f"unknown check(s): {', '.join(unknown)}", param_hint="--only")

    ctx = VerificationContext(size=size, max_states=config.exact.max_states)
    outcomes = registry.run_all(ctx, only=list(only) or None)

    table = Table(title="Mapping verification", show_lines=False)
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Deviation", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Time", justify="right")
    for o in outcomes:
        table.add_row(
            o.name,
            "[green]pass[/green]" if o.passed else "[red]FAIL[/red]",
            f"{o.value:.3g}",
            f"{o.tolerance:.1e}",
            f"{o.elapsed_s:.1f}s",
        )
    console.print(table)

    failed = [o.name for o in outcomes if not o.passed]
    if out:
        write_json(Path(out) / "verify.json", build_meta(
            "verify-mapping",
            {"size": size, "only": list(only), "max_states": config.exact.max_states},
            checks=[o.model_dump() for o in outcomes],
            passed=not failed,
        ))
    if failed:
        raise VerificationFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    console.print(f"[green]All {len(outcomes)} checks passed.[/green]")


# ---------------------------------------------------------------------------
# Resilience
# ---------------------------------------------------------------------------


@cli.command("lambda-sweep")
@click.option("--stiffness-file", default=None, help="stiffness.csv from stiffness-sweep")
@click.option("--sigma-min", type=float, default=None, help="config: resilience.sigma_min, 0.1")
@click.option("--sigma-max", type=float, default=None, help="config: resilience.sigma_max, 1.2")
@click.option("--steps", type=int, default=None, help="config: resilience.steps, 23")
@click.option("--dim", "-d", type=int, default=2, show_default=True)
@click.option("--size", "-L", type=int, default=64, show_default=True)
@click.option("--mode", type=click.Choice([m.value for m in LimitMode]), default="finite")
@click.option("--weight", type=click.Choice([m.value for m in ResilienceMode]),
              default=ResilienceMode.GAUSSIAN.value, help="exact-ratio needs no stiffness file")
@click.option("--sigma-c", type=float, default=None, help="Critical noise width for --mode thermo")
@click.option("--svg/--no-svg", default=None, help="Also write lambda.svg")
@click.option("--out", default=None, help="Output directory")
@click.pass_obj
def lambda_sweep_cmd(
    config: RotorXYConfig,
    stiffness_file: str | None,
    sigma_min: float | None,
    sigma_max: float | None,
    steps: int | None,
    dim: int,
    size: int,
    mode: str,
    weight: str,
    sigma_c: float | None,
    svg: bool | None,
    out: str | None,
) -> None:
    """Resilience order parameter lambda(sigma); writes lambda.csv."""
    resilience = config.resilience
    sigma_min = _pick(sigma_min, resilience.sigma_min)
    sigma_max = _pick(sigma_max, resilience.sigma_max)
    if not 0.0 < sigma_min <= sigma_max:
        raise click.BadParameter("need 0 < sigma-min <= sigma-max", param_hint="--sigma-min")
    sigmas = temperature_grid(sigma_min, sigma_max, _pick(steps, resilience.steps))
    run_config = RunConfig(
        command="lambda-sweep",
        params={
            "stiffness_file": stiffness_file, "sigmas": sigmas, "dim": dim, "size": size,
            "mode": mode, "weight": weight,
            "sigma_c": _pick(sigma_c, resilience.sigma_c),
            "quad_epsabs": resilience.quad_epsabs,
        },
        out_dir=_out_dir(config, out),
    )

    if ResilienceMode(weight) is ResilienceMode.EXACT:
        results = [
            lambda_exact(size, s, grid=config.resilience.phi_grid,
                         max_states=config.exact.max_states)
            for s in sigmas
        ]
    else:
        if stiffness_file is None:
            raise click.UsageError("--stiffness-file is required for the gaussian-weight mode")
        results = lambda_sweep(
            StiffnessTable.from_csv(stiffness_file),
            sigmas,
            d=dim,
            size=size,
            mode=LimitMode(mode),
            sigma_c=run_config.params["sigma_c"],
            epsabs=resilience.quad_epsabs,
        )

    frame = pd.DataFrame(
        [[r.sigma, r.lam, r.error, r.rho_s] for r in results], columns=LAMBDA_COLUMNS
    )
    out_dir = run_config.out_dir
    write_csv(out_dir / "lambda.csv", frame)
    write_json(out_dir / "lambda.meta.json", build_meta(
        "lambda-sweep", run_config.model_dump(mode="json"),
    ))
    if _pick(svg, config.output.svg):
        write_line_plot(
            out_dir / "lambda.svg", frame["sigma"].tolist(),
            {"lambda": (frame["lambda"].tolist(), frame["lambda_err"].tolist())},
            xlabel="sigma", ylabel="lambda", title=f"Resilience, d={dim}, L={size}",
        )
    _display_frame(frame, "Resilience order parameter")
    console.print(f"[green]Results written to {out_dir}/[/green]")


# ---------------------------------------------------------------------------
# init
# ---------------------------------------------------------------------------


@cli.command()
@click.option("--path", default=DEFAULT_CONFIG_FILE, show_default=True)
@click.option("--force", is_flag=True, help="Overwrite an existing file")
def init(path: str, force: bool) -> None:
    """Generate a sample rotorxy.yaml configuration file."""
    target = Path(path)
    if target.exists() and not force:
        raise click.UsageError(f"{target} already exists; use --force to overwrite")
    RotorXYConfig().write_sample(target)
    console.print(f"[green]Created {target} with default configuration.[/green]")


# ---------------------------------------------------------------------------
# Display helpers
# ---------------------------------------------------------------------------


def _display_point(row: dict[str, float], out_dir: Path) -> None:
    body = "\n".join(f"{key:<20} {value:.6g}" for key, value in row.items())
    console.print(Panel(body, title="[cyan]Point estimate[/cyan]", border_style="cyan"))
    console.print(f"[green]Results written to {out_dir}/[/green]")


def _display_frame(frame: pd.DataFrame, title: str) -> None:
    table = Table(title=title, show_lines=False)
    for column in frame.columns:
        table.add_column(str(column), justify="right")
    for values in frame.itertuples(index=False):
        table.add_row(*(f"{v:.5g}" for v in values))
    console.print(table)


def _plot_stiffness(path: Path, frame: pd.DataFrame) -> None:
    temps = frame["T"].to_numpy()
    line = JUMP_SLOPE * np.asarray(temps)
    write_line_plot(
        path, temps.tolist(),
        {
            "rho_s": (frame["rho_s"].tolist(), frame["rho_s_err"].tolist()),
            "2T/pi": (line.tolist(), None),
        },
        xlabel="T", ylabel="rho_s", title="Spin stiffness",
    )


if __name__ == "__main__":
    sys.exit(main())
