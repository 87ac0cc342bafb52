import logging
from pathlib import Path
from typing import Optional

import typer

from pdpa.controllers.cli import common
from pdpa.controllers.cli.common import cli_errors, console
from pdpa.models.enums import GameMode
from pdpa.services.dynamics import run_simulation
from pdpa.services.experiments import timecourse
from pdpa.utils import csv_io
from pdpa.utils.config_parser import dump_config, manifest_options, parse_config, run_overrides

logger = logging.getLogger(__name__)


def run(
    size: Optional[int] = common.SizeOpt,
    steps: Optional[int] = common.StepsOpt,
    rule: Optional[str] = common.RuleOpt,
    scheme: Optional[str] = common.SchemeOpt,
    T: Optional[float] = common.TOpt,
    L: Optional[float] = common.LOpt,
    K: Optional[float] = common.KOpt,
    replicates: Optional[int] = common.ReplicatesOpt,
    seed: Optional[int] = common.SeedOpt,
    out: Optional[Path] = common.OutOpt,
    sampling: Optional[str] = common.SamplingOpt,
    strict: bool = common.StrictOpt,
    sweep_mode: bool = common.SweepModeOpt,
    config: Optional[Path] = common.ConfigOpt,
    preset: Optional[str] = common.PresetOpt,
    workers: Optional[int] = common.WorkersOpt,
    snapshot_steps: Optional[str] = common.SnapshotStepsOpt,
    measure: Optional[str] = common.MeasureOpt,
    window: Optional[int] = common.WindowOpt,
    sync_plays: Optional[str] = common.SyncPlaysOpt,
):
    """
    Simulate one configuration and write its time series.

    With --replicates > 1 the replicate-averaged series goes to timecourse.csv
    instead (seeds derived from --seed).
    """
    with cli_errors():
        workers = common.require_at_least(workers, 1, "workers")
        common.require_at_least(replicates, 1, "replicates")
        overrides = run_overrides(
            size=size, steps=steps, rule=rule, scheme=scheme, T=T, L=L, K=K,
            mode=common.resolve_mode(strict, sweep_mode), seed=seed, sampling=sampling,
            snapshot_steps=common.parse_list_flag(snapshot_steps, "int", "snapshot_steps"),
            measure=measure, window=window, sync_plays=sync_plays,
        )
        run_config = parse_config(overrides, config, preset, GameMode.STRICT)
        if replicates is None:
            replicates = manifest_options(config).get("replicates", 1)
        out_dir = common.resolve_out(out)
        files: list[Path] = []

        if replicates > 1:
            with console.status(f"Running {replicates} replicates"):
                course = timecourse(run_config, replicates, run_config.seed, workers)
            files.append(csv_io.write_timecourse(course, out_dir / "timecourse.csv"))
            seeds = {"master_seed": run_config.seed, "replicates": list(course.seeds)}
        else:
            with common.progress_bar() as progress:
                task = progress.add_task("steps", total=run_config.step_count)
                result = run_simulation(run_config, on_step=lambda step, _: progress.update(task, completed=step))
            files.append(csv_io.write_timeseries(result.series, out_dir / "timeseries.csv"))
            for step, snap in result.snapshots.items():
                files.extend(csv_io.write_snapshot(snap, out_dir / f"snapshot_{step}"))
            seeds = [run_config.seed]
            final = result.series[-1]
            console.print(
                f"step {final.step}: <epsilon> = {final.mean_epsilon:.6f}, <alpha> = {final.mean_alpha:.6f}",
                highlight=False,
            )

        manifest = csv_io.write_manifest(
            out_dir, "run", dump_config(run_config), seeds, files, options={"replicates": replicates}
        )
        console.print(f"[green]wrote[/green] {len(files)} file(s) and {manifest}", highlight=False)
