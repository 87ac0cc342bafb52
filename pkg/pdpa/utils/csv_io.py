"""
CSV and manifest writers for output bundles.

All files are written with LF line endings and a fixed number format, so two
runs with the same configuration produce byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import numpy as np
import yaml

from pdpa import __version__
from pdpa.core.errors import OutputError
from pdpa.models.dto import AggregateResult, PopulationStats
from pdpa.models.enums import UpdateRule
from pdpa.models.lattice import SnapshotSet
from pdpa.utils.formatting import format_frequency, format_param, format_real

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"
TIMESERIES_BASE_COLUMNS = ["step", "mean_epsilon", "mean_alpha", "frac_cooperate", "frac_defect"]
AGGREGATE_COLUMNS = ["mean_epsilon", "se_epsilon", "mean_alpha", "se_alpha"]


@contextmanager
def _open_csv(path: Path) -> Iterator[Any]:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            yield csv.writer(handle, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"cannot write file: {e.strerror or e}", path=str(path)) from e


def write_timeseries(series: Sequence[PopulationStats], path: Path | str) -> Path:
    """
    One row per sampled step, ascending.

    Columns: step, mean_epsilon, mean_alpha, frac_cooperate, frac_defect,
    alpha_hist_0 .. alpha_hist_2k.
    """
    if not series:
        raise OutputError("time series is empty", path=str(path))
    path = Path(path)
    levels = len(series[0].alpha_histogram)
    with _open_csv(path) as writer:
        writer.writerow(TIMESERIES_BASE_COLUMNS + [f"alpha_hist_{i}" for i in range(levels)])
        for stats in sorted(series, key=lambda s: s.step):
            writer.writerow(
                [stats.step]
                + [format_real(v) for v in (stats.mean_epsilon, stats.mean_alpha, stats.frac_cooperate, stats.frac_defect)]
                + [format_frequency(v) for v in stats.alpha_histogram]
            )
    logger.debug("Wrote %d time series rows to %s", len(series), path)
    return path


def write_timecourse(timecourse: Any, path: Path | str) -> Path:
    """Replicate-averaged series: step, mean and standard error of epsilon and alpha."""
    path = Path(path)
    with _open_csv(path) as writer:
        writer.writerow(["step"] + AGGREGATE_COLUMNS)
        for i, step in enumerate(timecourse.steps):
            writer.writerow([int(step)] + [format_real(v) for v in (
                timecourse.mean_epsilon[i], timecourse.se_epsilon[i],
                timecourse.mean_alpha[i], timecourse.se_alpha[i],
            )])
    return path


def write_sweep_table(result: AggregateResult, path: Path | str) -> Path:
    """scheme, rule, T, L and the four aggregates; one row per cell in (scheme, rule, L, T) order."""
    path = Path(path)
    with _open_csv(path) as writer:
        writer.writerow(["scheme", "rule", "T", "L"] + AGGREGATE_COLUMNS)
        for cell in result.cells:
            writer.writerow(
                [cell.scheme, str(cell.rule), format_param(cell.T), format_param(cell.L)]
                + [format_real(v) for v in (cell.mean_epsilon, cell.se_epsilon, cell.mean_alpha, cell.se_alpha)]
            )
    return path


def heatmap_name(scheme: str, rule: UpdateRule) -> str:
    safe = scheme.replace(":", "-").replace(",", "_")
    return f"heatmap_{safe}_{rule}.csv"


def write_heatmap(result: AggregateResult, scheme: str, rule: UpdateRule, path: Path | str) -> Path:
    """Long-form T-L plane of one (scheme, rule) group, sorted by (L, T)."""
    path = Path(path)
    cells = sorted(
        (c for c in result.cells if c.scheme == scheme and c.rule == rule),
        key=lambda c: (c.l_index, c.t_index),
    )
    if len(cells) != len(result.t_values) * len(result.l_values):
        raise OutputError(f"heat map for {scheme}/{rule} is missing cells", path=str(path))
    with _open_csv(path) as writer:
        writer.writerow(["T", "L"] + AGGREGATE_COLUMNS)
        for cell in cells:
            writer.writerow(
                [format_param(cell.T), format_param(cell.L)]
                + [format_real(v) for v in (cell.mean_epsilon, cell.se_epsilon, cell.mean_alpha, cell.se_alpha)]
            )
    return path


def write_replicates(result: AggregateResult, path: Path | str) -> Path:
    """Raw stationary values of every replicate with the seed that produced it."""
    path = Path(path)
    with _open_csv(path) as writer:
        writer.writerow(["scheme", "rule", "T", "L", "replicate", "seed", "epsilon", "alpha"])
        for cell in result.cells:
            for rep, (seed, eps, alpha) in enumerate(zip(cell.seeds, cell.raw_epsilon, cell.raw_alpha)):
                writer.writerow([
                    cell.scheme, str(cell.rule), format_param(cell.T), format_param(cell.L),
                    rep, seed, format_real(eps), format_real(alpha),
                ])
    return path


def write_grid(grid: np.ndarray, path: Path, integer: bool = False) -> Path:
    with _open_csv(path) as writer:
        for row in grid:
            writer.writerow([str(int(v)) if integer else format_real(v) for v in row])
    return path


def write_snapshot(snap: SnapshotSet, stem: Path | str) -> list[Path]:
    """``<stem>.epsilon.csv``, ``<stem>.alpha.csv`` and ``<stem>.strategy.csv``; rows are lattice rows."""
    stem = Path(stem)
    return [
        write_grid(snap.grid_epsilon, stem.with_name(f"{stem.name}.epsilon.csv")),
        write_grid(snap.grid_alpha, stem.with_name(f"{stem.name}.alpha.csv")),
        write_grid(snap.grid_strategy, stem.with_name(f"{stem.name}.strategy.csv"), integer=True),
    ]


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path | str,
    command: str,
    config: dict[str, Any],
    seeds: Any,
    files: Sequence[Path],
    options: Optional[dict[str, Any]] = None,
) -> Path:
    """
    manifest.yaml: artifact version, command, resolved config, command options
    outside the config (e.g. replicate count of ``run``), seeds and the SHA-256
    of every file in the bundle. No timestamps, so it is reproducible too.
    """
    out_dir = Path(out_dir)
    path = out_dir / MANIFEST_NAME
    checksums = {}
    try:
        for file in sorted(files, key=lambda p: p.name):
            checksums[file.name] = file_sha256(file)
    except OSError as e:
        raise OutputError(f"cannot hash bundle file: {e}", path=str(e.filename or out_dir)) from e
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "reproduce": f"pdpa {command} --config {MANIFEST_NAME} --out <dir>",
        "config": config,
        "options": options or {},
        "seeds": seeds,
        "files": checksums,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n", encoding="utf-8") as handle:
            yaml.safe_dump(manifest, handle, sort_keys=False, default_flow_style=False)
    except OSError as e:
        raise OutputError(f"cannot write manifest: {e.strerror or e}", path=str(path)) from e
    logger.info("Wrote manifest for %d file(s) to %s", len(checksums), path)
    return path
