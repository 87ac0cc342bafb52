import logging
from pathlib import Path
from typing import Optional

import typer

from pdpa.controllers.cli import common
from pdpa.controllers.cli.common import cli_errors, console
from pdpa.models.enums import GameMode
from pdpa.services.dynamics import run_simulation
from pdpa.utils import csv_io
from pdpa.utils.config_parser import dump_config, parse_config, run_overrides

logger = logging.getLogger(__name__)


def snapshot(
    size: Optional[int] = common.SizeOpt,
    steps: Optional[int] = common.StepsOpt,
    rule: Optional[str] = common.RuleOpt,
    scheme: Optional[str] = common.SchemeOpt,
    T: Optional[float] = common.TOpt,
    L: Optional[float] = common.LOpt,
    K: Optional[float] = common.KOpt,
    seed: Optional[int] = common.SeedOpt,
    out: Optional[Path] = common.OutOpt,
    strict: bool = common.StrictOpt,
    sweep_mode: bool = common.SweepModeOpt,
    config: Optional[Path] = common.ConfigOpt,
    preset: Optional[str] = common.PresetOpt,
    snapshot_steps: Optional[str] = common.SnapshotStepsOpt,
    sync_plays: Optional[str] = common.SyncPlaysOpt,
):
    """
    Keep the lattice grids (epsilon, alpha, strategy) of one run.

    Without --snapshot-steps the final step is captured.
    """
    with cli_errors():
        overrides = run_overrides(
            size=size, steps=steps, rule=rule, scheme=scheme, T=T, L=L, K=K,
            mode=common.resolve_mode(strict, sweep_mode), seed=seed,
            snapshot_steps=common.parse_list_flag(snapshot_steps, "int", "snapshot_steps"),
            sync_plays=sync_plays,
        )
        run_config = parse_config(overrides, config, preset, GameMode.STRICT)
        if not run_config.snapshot_steps:
            run_config = run_config.model_copy(update={"snapshot_steps": (run_config.step_count,)})
        out_dir = common.resolve_out(out)

        with common.progress_bar() as progress:
            task = progress.add_task("steps", total=run_config.step_count)
            result = run_simulation(run_config, on_step=lambda step, _: progress.update(task, completed=step))

        files: list[Path] = []
        for step, snap in sorted(result.snapshots.items()):
            files.extend(csv_io.write_snapshot(snap, out_dir / f"snapshot_{step}"))
        manifest = csv_io.write_manifest(out_dir, "snapshot", dump_config(run_config), [run_config.seed], files)
        console.print(
            f"[green]wrote[/green] {len(result.snapshots)} snapshot(s) at steps "
            f"{', '.join(str(s) for s in sorted(result.snapshots))} and {manifest}",
            highlight=False,
        )
