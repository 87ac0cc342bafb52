import logging
from pathlib import Path
from typing import Any, List, Optional

import typer
from rich.table import Table

from pdpa.controllers.cli import common
from pdpa.controllers.cli.common import cli_errors, console
from pdpa.models.dto import AggregateResult, SweepSpec
from pdpa.models.enums import GameMode
from pdpa.services import experiments
from pdpa.utils import csv_io
from pdpa.utils.config_parser import TL_L_VALUES, TL_T_VALUES, dump_config, parse_sweep, run_overrides
from pdpa.utils.formatting import format_param

logger = logging.getLogger(__name__)


def _resolve_spec(
    command: str,
    default_mode: GameMode,
    default_axes: Optional[dict[str, tuple[float, ...]]],
    *,
    size, steps, rule, scheme, T, L, K, replicates, seed, sampling, strict, sweep_mode,
    config, preset, measure, window, sync_plays, t_values, l_values, schemes, rules,
) -> SweepSpec:
    base = run_overrides(
        size=size, steps=steps, rule=rule, scheme=scheme, T=T, L=L, K=K,
        mode=common.resolve_mode(strict, sweep_mode), sampling=sampling,
        measure=measure, window=window, sync_plays=sync_plays,
    )
    overrides: dict[str, Any] = {
        key: value for key, value in {
            "t_values": common.parse_list_flag(t_values, "float", "t_values"),
            "l_values": common.parse_list_flag(l_values, "float", "l_values"),
            "schemes": common.parse_names(schemes),
            "rules": common.parse_names(rules),
            "replicates": replicates,
            "master_seed": seed,
        }.items() if value is not None
    }
    if L is not None and "l_values" not in overrides and command == "sweep-t":
        overrides["l_values"] = (L,)
    return parse_sweep(overrides, base, config, preset, default_mode, default_axes)


def _execute(command: str, spec: SweepSpec, workers: Optional[int]) -> AggregateResult:
    total = len(spec.resolved_schemes) * len(spec.resolved_rules) * len(spec.t_values) * len(spec.l_values)
    with common.progress_bar() as progress:
        task = progress.add_task(f"{command} cells", total=total)

        def _on_cell_done(done: int, _total: int) -> None:
            progress.update(task, completed=done)

        if command == "sweep-t":
            return experiments.sweep_temptation(spec, workers, _on_cell_done)
        return experiments.sweep_tl(spec, workers, _on_cell_done)


def _summary(result: AggregateResult) -> Table:
    table = Table(title="stationary averages", show_lines=False)
    for column in ("scheme", "rule", "T", "L", "<epsilon>", "<alpha>"):
        table.add_column(column)
    for cell in result.cells:
        table.add_row(
            cell.scheme, str(cell.rule), format_param(cell.T), format_param(cell.L),
            f"{cell.mean_epsilon:.4f} ± {cell.se_epsilon:.4f}",
            f"{cell.mean_alpha:.4f} ± {cell.se_alpha:.4f}",
        )
    return table


def _seeds(spec: SweepSpec) -> dict[str, Any]:
    return {"master_seed": spec.master_seed, "derivation": "sha256(<4Q master, t_index, l_index, replicate)[:8] little-endian"}


def sweep_t(
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
    measure: Optional[str] = common.MeasureOpt,
    window: Optional[int] = common.WindowOpt,
    sync_plays: Optional[str] = common.SyncPlaysOpt,
    t_values: Optional[str] = common.TValuesOpt,
    schemes: Optional[List[str]] = common.SchemesOpt,
    rules: Optional[List[str]] = common.RulesOpt,
):
    """
    Temptation sweep at one loner's payoff: one row per (scheme, rule, T) in sweep_t.csv.
    """
    with cli_errors():
        workers = common.require_at_least(workers, 1, "workers")
        spec = _resolve_spec(
            "sweep-t", GameMode.STRICT, None,
            size=size, steps=steps, rule=rule, scheme=scheme, T=T, L=L, K=K, replicates=replicates,
            seed=seed, sampling=sampling, strict=strict, sweep_mode=sweep_mode, config=config,
            preset=preset, measure=measure, window=window, sync_plays=sync_plays,
            t_values=t_values, l_values=None, schemes=schemes, rules=rules,
        )
        out_dir = common.resolve_out(out)
        result = _execute("sweep-t", spec, workers)
        files = [
            csv_io.write_sweep_table(result, out_dir / "sweep_t.csv"),
            csv_io.write_replicates(result, out_dir / "replicates.csv"),
        ]
        manifest = csv_io.write_manifest(out_dir, "sweep-t", dump_config(spec), _seeds(spec), files)
        console.print(_summary(result))
        console.print(f"[green]wrote[/green] {len(files)} file(s) and {manifest}", highlight=False)


def sweep_tl(
    size: Optional[int] = common.SizeOpt,
    steps: Optional[int] = common.StepsOpt,
    rule: Optional[str] = common.RuleOpt,
    scheme: Optional[str] = common.SchemeOpt,
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
    measure: Optional[str] = common.MeasureOpt,
    window: Optional[int] = common.WindowOpt,
    sync_plays: Optional[str] = common.SyncPlaysOpt,
    t_values: Optional[str] = common.TValuesOpt,
    l_values: Optional[str] = common.LValuesOpt,
    schemes: Optional[List[str]] = common.SchemesOpt,
    rules: Optional[List[str]] = common.RulesOpt,
):
    """
    T-L plane sweep: one heatmap_<scheme>_<rule>.csv per group, rows sorted by (L, T).

    Defaults to the 21 x 21 grid T = 1.00..2.00, L = 0.00..1.00 in sweep mode.
    """
    with cli_errors():
        workers = common.require_at_least(workers, 1, "workers")
        spec = _resolve_spec(
            "sweep-tl", GameMode.SWEEP, {"t_values": TL_T_VALUES, "l_values": TL_L_VALUES},
            size=size, steps=steps, rule=rule, scheme=scheme, T=None, L=None, K=K, replicates=replicates,
            seed=seed, sampling=sampling, strict=strict, sweep_mode=sweep_mode, config=config,
            preset=preset, measure=measure, window=window, sync_plays=sync_plays,
            t_values=t_values, l_values=l_values, schemes=schemes, rules=rules,
        )
        out_dir = common.resolve_out(out)
        result = _execute("sweep-tl", spec, workers)
        files = [
            csv_io.write_heatmap(result, scheme_name, rule_value, out_dir / csv_io.heatmap_name(scheme_name, rule_value))
            for scheme_name, rule_value in result.groups()
        ]
        files.append(csv_io.write_replicates(result, out_dir / "replicates.csv"))
        manifest = csv_io.write_manifest(out_dir, "sweep-tl", dump_config(spec), _seeds(spec), files)
        console.print(f"[green]wrote[/green] {len(files)} file(s) and {manifest}", highlight=False)
