"""
Entry point of the pdpa command line.

Configures logging from the environment (PDPA_LOG_LEVEL, PDPA_LOG_FILE) and
registers one command per controller module.
"""

import logging
import sys

import typer

from pdpa import __version__
from pdpa.core.config import CONFIG
from pdpa.controllers.cli.common import CliGroup
from pdpa.controllers.cli import (
    run_controller,        # single runs and replicate time courses
    snapshot_controller,   # lattice grids
    sweep_controller,      # temptation and T-L sweeps
    selftest_controller,   # oracles
)


def configure_logging(level: str = CONFIG.LOG_LEVEL) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if CONFIG.LOG_FILE:
        handlers.append(logging.FileHandler(CONFIG.LOG_FILE, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


configure_logging()
logger = logging.getLogger(__name__)

app = typer.Typer(
    name="pdpa",
    help="Spatial prisoner's dilemma with probabilistic abstention: runs, sweeps, snapshots and self-checks.",
    no_args_is_help=True,
    add_completion=False,
    cls=CliGroup,
)


def _version(value: bool) -> None:
    if value:
        typer.echo(f"pdpa {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level."),
    version: bool = typer.Option(False, "--version", callback=_version, is_eager=True, help="Show the version."),
):
    if verbose:
        configure_logging("DEBUG")


app.command("run")(run_controller.run)
app.command("snapshot")(snapshot_controller.snapshot)
app.command("sweep-t")(sweep_controller.sweep_t)
app.command("sweep-tl")(sweep_controller.sweep_tl)
app.command("selftest")(selftest_controller.selftest)


if __name__ == "__main__":
    app()
