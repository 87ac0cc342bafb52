"""
Replicate batches and parameter sweeps.

Every replicate is an independent simulation with a seed derived from the
master seed and its (t_index, l_index, replicate) coordinates. Work runs on a
process pool; results are keyed and reduced in sorted key order, so the
aggregate is the same whatever the worker count or completion order.
"""
from __future__ import annotations

import hashlib
import logging
import math
import struct
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, Iterable, Optional

import numpy as np

from pdpa.core.config import CONFIG
from pdpa.core.errors import ConfigError, SimulationError
from pdpa.core.rng import SEED_MASK
from pdpa.models.dto import AggregateCell, AggregateResult, RunConfig, SweepSpec
from pdpa.models.enums import UpdateRule
from pdpa.services.dynamics import run_simulation

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]

# (scheme index, rule index, t index, l index, replicate)
TaskKey = tuple[int, int, int, int, int]


def derive_seed(master_seed: int, t_index: int, l_index: int, replicate: int) -> int:
    """
    First 8 bytes (little-endian) of SHA-256 over the four words packed as
    little-endian unsigned 64-bit integers.
    """
    if min(t_index, l_index, replicate) < 0:
        raise ValueError("seed indices must be >= 0")
    payload = struct.pack("<4Q", master_seed & SEED_MASK, t_index, l_index, replicate)
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


@dataclass(frozen=True)
class ReplicateTask:
    key: TaskKey
    config: RunConfig
    keep_series: bool = False


@dataclass(frozen=True)
class ReplicateOutcome:
    key: TaskKey
    seed: int
    mean_epsilon: float = math.nan
    mean_alpha: float = math.nan
    series: Optional[tuple[tuple[int, float, float], ...]] = None
    error: Optional[str] = None


def run_task(task: ReplicateTask) -> ReplicateOutcome:
    """Worker entry point; failures come back as data so the seed survives pickling."""
    try:
        result = run_simulation(task.config)
    except Exception as e:
        logger.exception("Replicate %s failed (seed=%d)", task.key, task.config.seed)
        return ReplicateOutcome(task.key, task.config.seed, error=f"{type(e).__name__}: {e}")
    series = None
    if task.keep_series:
        series = tuple((s.step, s.mean_epsilon, s.mean_alpha) for s in result.series)
    eps, alpha = result.stationary
    return ReplicateOutcome(task.key, task.config.seed, eps, alpha, series)


def execute(
    tasks: list[ReplicateTask],
    workers: Optional[int] = None,
    on_task_done: Optional[Callable[[ReplicateOutcome], None]] = None,
) -> list[ReplicateOutcome]:
    """
    Run every task and return the outcomes sorted by key.

    Raises:
        SimulationError: naming the seed of the first failed replicate (in key order).
    """
    n_workers = min(CONFIG.worker_count(workers), max(1, len(tasks)))
    logger.info("Executing %d replicates on %d worker(s)", len(tasks), n_workers)
    outcomes: list[ReplicateOutcome] = []

    def _collect(results: Iterable[ReplicateOutcome]) -> None:
        for outcome in results:
            outcomes.append(outcome)
            if on_task_done is not None:
                on_task_done(outcome)

    if n_workers == 1:
        _collect(run_task(task) for task in tasks)
    else:
        with Pool(processes=n_workers) as pool:
            _collect(pool.imap_unordered(run_task, tasks, chunksize=1))

    outcomes.sort(key=lambda o: o.key)
    for outcome in outcomes:
        if outcome.error is not None:
            raise SimulationError(f"replicate {outcome.key} failed: {outcome.error}", seed=outcome.seed)
    return outcomes


def mean_and_se(values: list[float]) -> tuple[float, float]:
    """Mean (kept within [min, max]) and sample standard deviation / sqrt(n); se = 0 for n = 1."""
    n = len(values)
    mean = math.fsum(values) / n
    mean = min(max(mean, min(values)), max(values))
    if n == 1:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance / n)


def aggregate_cell(
    scheme: str, rule: UpdateRule, T: float, L: float, t_index: int, l_index: int,
    outcomes: list[ReplicateOutcome],
) -> AggregateCell:
    eps = [o.mean_epsilon for o in outcomes]
    alpha = [o.mean_alpha for o in outcomes]
    mean_eps, se_eps = mean_and_se(eps)
    mean_alpha, se_alpha = mean_and_se(alpha)
    return AggregateCell(
        scheme=scheme, rule=rule, T=T, L=L, t_index=t_index, l_index=l_index,
        replicates=len(outcomes),
        mean_epsilon=mean_eps, se_epsilon=se_eps,
        mean_alpha=mean_alpha, se_alpha=se_alpha,
        seeds=tuple(o.seed for o in outcomes),
        raw_epsilon=tuple(eps), raw_alpha=tuple(alpha),
    )


def run_replicates(
    config: RunConfig,
    replicates: int,
    master_seed: int,
    workers: Optional[int] = None,
    t_index: int = 0,
    l_index: int = 0,
) -> AggregateCell:
    """Aggregate of ``replicates`` independent runs of one configuration."""
    if replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {replicates}", key="replicates")
    tasks = [
        ReplicateTask(
            (0, 0, t_index, l_index, rep),
            config.model_copy(update={'seed': derive_seed(master_seed, t_index, l_index, rep)}),
        )
        for rep in range(replicates)
    ]
    outcomes = execute(tasks, workers)
    return aggregate_cell(str(config.scheme), config.rule, config.game.T, config.game.L, t_index, l_index, outcomes)


def sweep(
    spec: SweepSpec,
    workers: Optional[int] = None,
    on_cell_done: Optional[ProgressCallback] = None,
) -> AggregateResult:
    """Every (scheme, rule, T, L) cell of the spec, in (scheme, rule, L, T) order."""
    schemes = spec.resolved_schemes
    rules = spec.resolved_rules
    tasks: list[ReplicateTask] = []
    for si, scheme in enumerate(schemes):
        for ri, rule in enumerate(rules):
            for li, L in enumerate(spec.l_values):
                for ti, T in enumerate(spec.t_values):
                    for rep in range(spec.replicates):
                        seed = derive_seed(spec.master_seed, ti, li, rep)
                        tasks.append(ReplicateTask((si, ri, ti, li, rep), spec.cell_config(scheme, rule, T, L, seed)))

    total_cells = len(tasks) // spec.replicates
    remaining: dict[tuple[int, int, int, int], int] = {}
    finished = 0

    def _tick(outcome: ReplicateOutcome) -> None:
        nonlocal finished
        cell = outcome.key[:4]
        remaining[cell] = remaining.get(cell, spec.replicates) - 1
        if remaining[cell] == 0:
            finished += 1
            if on_cell_done is not None:
                on_cell_done(finished, total_cells)

    logger.info(
        "Sweep: %d scheme(s) x %d rule(s) x %d T x %d L, %d replicates, master seed %d",
        len(schemes), len(rules), len(spec.t_values), len(spec.l_values), spec.replicates, spec.master_seed,
    )
    outcomes = execute(tasks, workers, _tick)

    keyed: list[tuple[tuple[int, int, int, int], AggregateCell]] = []
    for start in range(0, len(outcomes), spec.replicates):
        group = outcomes[start:start + spec.replicates]
        si, ri, ti, li, _ = group[0].key
        cell = aggregate_cell(str(schemes[si]), rules[ri], spec.t_values[ti], spec.l_values[li], ti, li, group)
        keyed.append(((si, ri, li, ti), cell))
    keyed.sort(key=lambda item: item[0])
    return AggregateResult(
        t_values=spec.t_values, l_values=spec.l_values, cells=tuple(cell for _, cell in keyed)
    )


def sweep_temptation(
    spec: SweepSpec,
    workers: Optional[int] = None,
    on_cell_done: Optional[ProgressCallback] = None,
) -> AggregateResult:
    """Temptation sweep at a single loner's payoff."""
    if len(spec.l_values) != 1:
        raise ConfigError(f"temptation sweep takes exactly one L value, got {len(spec.l_values)}", key="l_values")
    return sweep(spec, workers, on_cell_done)


def sweep_tl(
    spec: SweepSpec,
    workers: Optional[int] = None,
    on_cell_done: Optional[ProgressCallback] = None,
) -> AggregateResult:
    """Full T x L plane; ``AggregateResult.matrices`` gives the (L, T) grids."""
    return sweep(spec, workers, on_cell_done)


@dataclass(frozen=True)
class Timecourse:
    """Replicate-averaged series on a shared sampling schedule; raw arrays are (replicates, steps)."""
    steps: np.ndarray
    mean_epsilon: np.ndarray
    se_epsilon: np.ndarray
    mean_alpha: np.ndarray
    se_alpha: np.ndarray
    raw_epsilon: np.ndarray
    raw_alpha: np.ndarray
    seeds: tuple[int, ...]


def timecourse(
    config: RunConfig,
    replicates: int,
    master_seed: int,
    workers: Optional[int] = None,
) -> Timecourse:
    """Mean and standard error of epsilon and alpha at every sampled step across replicates."""
    if replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {replicates}", key="replicates")
    tasks = [
        ReplicateTask(
            (0, 0, 0, 0, rep),
            config.model_copy(update={'seed': derive_seed(master_seed, 0, 0, rep)}),
            keep_series=True,
        )
        for rep in range(replicates)
    ]
    outcomes = execute(tasks, workers)
    raw = np.array([o.series for o in outcomes], dtype=np.float64)
    eps, alpha = raw[:, :, 1], raw[:, :, 2]
    ddof = 1 if replicates > 1 else 0
    scale = math.sqrt(replicates)
    return Timecourse(
        steps=raw[0, :, 0].astype(np.int64),
        mean_epsilon=eps.mean(axis=0),
        se_epsilon=eps.std(axis=0, ddof=ddof) / scale,
        mean_alpha=alpha.mean(axis=0),
        se_alpha=alpha.std(axis=0, ddof=ddof) / scale,
        raw_epsilon=eps,
        raw_alpha=alpha,
        seeds=tuple(o.seed for o in outcomes),
    )
