import logging
from typing import Optional

import typer
from rich.markup import escape
from rich.table import Table

from pdpa.controllers.cli import common
from pdpa.controllers.cli.common import cli_errors, console
from pdpa.core.errors import SelftestFailure
from pdpa.services.oracles import run_selftest

logger = logging.getLogger(__name__)


def selftest(
    quick: bool = typer.Option(False, "--quick", help="Smaller samples; finishes in seconds."),
    seed: Optional[int] = common.SeedOpt,
):
    """Run the exact and statistical oracles; exit code 3 when any of them fails."""
    with cli_errors():
        common.require_at_least(seed, 0, "seed")
        with console.status("Running oracles"):
            reports = run_selftest(quick=quick, seed=seed if seed is not None else 1)

        table = Table(title="selftest")
        table.add_column("check")
        table.add_column("result")
        table.add_column("detail")
        for report in reports:
            verdict = "[green]pass[/green]" if report.passed else "[bold red]FAIL[/bold red]"
            table.add_row(report.name, verdict, escape(report.detail))
        console.print(table)

        failed = [r.name for r in reports if not r.passed]
        if failed:
            raise SelftestFailure(f"{len(failed)} oracle(s) failed: {', '.join(failed)}")
