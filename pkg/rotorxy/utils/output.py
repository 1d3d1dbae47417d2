"""
Result files: atomic CSV/JSON writes, the ``meta.json`` sidecar and SVG line plots.

Every file is written to a temporary sibling and renamed into place, so an interrupted
run never leaves a truncated output behind.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from collections.abc import Sequence
from importlib import metadata
from pathlib import Path
from typing import Any

import pandas as pd
from matplotlib.figure import Figure

logger = logging.getLogger(__name__)


def artifact_version() -> str:
    try:
        return metadata.version("rotorxy")
    except metadata.PackageNotFoundError:
        from rotorxy import __version__

        return __version__


def atomic_write_text(path: str | Path, text: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)
    return target


def write_csv(path: str | Path, frame: pd.DataFrame) -> Path:
    """Header row, '.' decimal, columns in frame order, full float precision."""
    return atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def _json_default(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _finite(value: Any) -> Any:
    # NaN and inf are not valid JSON
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(v) for v in value]
    return value


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    text = json.dumps(_finite(payload), indent=2, sort_keys=True, default=_json_default)
    return atomic_write_text(path, text + "\n")


def build_meta(
    command: str,
    params: dict[str, Any],
    runtime: dict[str, Any] | None = None,
    **extra: Any,
) -> dict[str, Any]:
    """Sidecar record: artifact version, full parameter echo and runtime statistics."""
    meta: dict[str, Any] = {
        "artifact": "rotorxy",
        "version": artifact_version(),
        "command": command,
        "params": params,
        "runtime": runtime or {},
    }
    meta.update(extra)
    return meta


def write_line_plot(
    path: str | Path,
    x: Sequence[float],
    series: dict[str, tuple[Sequence[float], Sequence[float] | None]],
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
) -> Path:
    """
    Minimal SVG line plot.

    Args:
        series: label -> (y values, optional error bars).
    """
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    for label, (y, err) in series.items():
        if err is None:
            ax.plot(x, y, label=label)
        else:
            ax.errorbar(x, y, yerr=err, marker="o", markersize=3, capsize=2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    os.close(fd)
    try:
        # fixed metadata keeps repeated runs byte-identical
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return target
