"""
Pieces shared by every command: option declarations, error-to-exit-code
mapping and the stderr console used for progress and summaries.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import click
import typer
from typer.core import TyperGroup
from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from pdpa.core.config import CONFIG
from pdpa.core.errors import ConfigError, PDPAError
from pdpa.models.enums import GameMode
from pdpa.utils.formatting import parse_floats, parse_ints, split_list

logger = logging.getLogger(__name__)

console = Console(stderr=True)

SizeOpt = typer.Option(None, "--size", help="Lattice side length (square lattice). [default: 102]")
StepsOpt = typer.Option(None, "--steps", help="Monte Carlo steps. [default: 100000]")
RuleOpt = typer.Option(None, "--rule", help="Update rule: sync | async. [default: sync]")
SchemeOpt = typer.Option(None, "--scheme", help="Initialization: pd | opd | pdpa | custom:w0,...,w8. [default: pdpa]")
TOpt = typer.Option(None, "--T", help="Temptation to defect. [default: 1.4]")
LOpt = typer.Option(None, "--L", help="Loner's payoff. [default: 0.4]")
KOpt = typer.Option(None, "--K", help="Fermi noise amplitude. [default: 0.1]")
SeedOpt = typer.Option(None, "--seed", help="Run seed, or master seed for batches. [default: 1]")
OutOpt = typer.Option(None, "--out", help="Output directory. [default: $PDPA_OUTPUT_DIR or ./results]")
SamplingOpt = typer.Option(None, "--sampling", help="dense-early | every-k:<k> | all. [default: dense-early]")
StrictOpt = typer.Option(False, "--strict", help="Open parameter ranges 1 < T < 2, 0 < L < 1.")
SweepModeOpt = typer.Option(False, "--sweep-mode", help="Also admit the closed endpoints of T and L.")
ConfigOpt = typer.Option(None, "--config", help="YAML config file or a manifest.yaml.")
PresetOpt = typer.Option(None, "--preset", help="paper (102x102, 1e5 steps, 100 reps) | desk (50x50, 2e4 steps, 20 reps).")
WorkersOpt = typer.Option(None, "--workers", help="Worker processes (capped by PDPA_THREADS). [default: CPU count]")
ReplicatesOpt = typer.Option(None, "--replicates", help="Independent replicates per cell.")
MeasureOpt = typer.Option(None, "--measure", help="Stationary value: final | window. [default: final]")
WindowOpt = typer.Option(None, "--window", help="Trailing window for --measure window. [default: 1000]")
SyncPlaysOpt = typer.Option(None, "--sync-plays", help="Synchronous plays: edge | directed. [default: edge]")
SnapshotStepsOpt = typer.Option(None, "--snapshot-steps", help="Comma-separated steps to keep lattice grids at.")
TValuesOpt = typer.Option(None, "--T-values", help="Comma-separated temptation values.")
LValuesOpt = typer.Option(None, "--L-values", help="Comma-separated loner's payoff values.")
SchemesOpt = typer.Option(None, "--schemes", help="Schemes to sweep; repeat or comma-separate.")
RulesOpt = typer.Option(None, "--rules", help="Rules to sweep, comma-separated.")


class CliGroup(TyperGroup):
    """
    Command group that reports flag errors (unknown flag, wrong type, missing
    value) with exit code 1, the code of every other configuration error.
    """

    def make_context(self, *args, **kwargs) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise


@contextmanager
def cli_errors() -> Iterator[None]:
    """Report a PDPAError on stderr and exit with its code."""
    try:
        yield
    except PDPAError as e:
        logger.debug("Command failed", exc_info=True)
        console.print(f"[bold red]error:[/bold red] {escape(str(e))}", highlight=False)
        raise typer.Exit(code=e.exit_code)


def resolve_mode(strict: bool, sweep_mode: bool) -> Optional[GameMode]:
    if strict and sweep_mode:
        raise ConfigError("--strict and --sweep-mode are mutually exclusive", key="mode")
    if strict:
        return GameMode.STRICT
    if sweep_mode:
        return GameMode.SWEEP
    return None


def resolve_out(out: Optional[Path]) -> Path:
    return Path(out) if out is not None else Path(CONFIG.OUTPUT_DIR)


def parse_list_flag(text: Optional[str], kind: str, key: str) -> Optional[tuple]:
    """Comma-separated flag value; None when the flag was not given."""
    if text is None:
        return None
    try:
        return parse_floats(text) if kind == "float" else parse_ints(text)
    except ValueError:
        raise ConfigError(f"expected comma-separated {kind}s, got '{text}'", key=key)


def parse_names(values: Optional[List[str]]) -> Optional[tuple[str, ...]]:
    if not values:
        return None
    names: list[str] = []
    for value in values:
        names.extend(split_list(value))
    return tuple(names)


def progress_bar() -> Progress:
    return Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )


def require_at_least(value: Optional[int], minimum: int, key: str) -> Optional[int]:
    """Flag value checked against a lower bound; None passes through."""
    if value is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", key=key)
    return value
