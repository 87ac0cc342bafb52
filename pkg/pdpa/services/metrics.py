"""
Population observables, recording schedules and lattice snapshots.

Means are exact: every observable is a count-weighted sum over the finite set
of (strategy, level) states, so the only rounding is one division per value.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from pdpa.models.dto import PopulationStats, SamplingSpec
from pdpa.models.enums import SamplingMode
from pdpa.models.lattice import Lattice, SnapshotSet

logger = logging.getLogger(__name__)

DENSE_HORIZON = 1000
POINTS_PER_DECADE = 50


def _stats_from_counts(joint: np.ndarray, step: int, kappa: int) -> PopulationStats:
    """joint[s, level] holds the number of agents in each state."""
    n = int(joint.sum())
    max_level = 2 * kappa
    levels = np.arange(max_level + 1)
    # epsilon and alpha only take values level/max_level, so integer sums are exact
    coop_weight = int(((max_level - levels) * joint[0]).sum())
    alpha_weight = int((levels * joint.sum(axis=0)).sum())
    denominator = n * max_level
    cooperators = int(joint[0].sum())
    hist = joint.sum(axis=0) / n
    return PopulationStats(
        step=step,
        mean_epsilon=coop_weight / denominator,
        mean_alpha=alpha_weight / denominator,
        frac_cooperate=cooperators / n,
        frac_defect=(n - cooperators) / n,
        alpha_histogram=tuple(float(v) for v in hist),
        joint_histogram=(
            tuple(float(v) for v in joint[0] / n),
            tuple(float(v) for v in joint[1] / n),
        ),
        frac_pure_cooperators=int(joint[0, 0]) / n,
        frac_sporadic_cooperators=int(joint[0, 1:max_level].sum()) / n,
        frac_pure_defectors=int(joint[1, 0]) / n,
        frac_sporadic_defectors=int(joint[1, 1:max_level].sum()) / n,
        frac_loners=int(joint[:, max_level].sum()) / n,
    )


def _joint_counts(strategy: np.ndarray, level: np.ndarray, kappa: int) -> np.ndarray:
    levels = 2 * kappa + 1
    flat = strategy.astype(np.int64).ravel() * levels + level.astype(np.int64).ravel()
    return np.bincount(flat, minlength=2 * levels).reshape(2, levels)


def population_stats(lattice: Lattice, step: int) -> PopulationStats:
    """Means and frequencies over every agent of the lattice."""
    return _stats_from_counts(_joint_counts(lattice.strategy, lattice.level, lattice.kappa), step, lattice.kappa)


def snapshot(lattice: Lattice, step: int) -> SnapshotSet:
    """Per-site epsilon, alpha and strategy grids, independent of later mutation."""
    return SnapshotSet(
        step=step,
        grid_epsilon=lattice.epsilon_grid(),
        grid_alpha=lattice.alpha_grid(),
        grid_strategy=lattice.strategy.copy(),
        kappa=lattice.kappa,
    )


def stats_from_snapshot(snap: SnapshotSet) -> PopulationStats:
    """Recompute the step's stats from the snapshot grids alone."""
    max_level = 2 * snap.kappa
    level = np.rint(np.asarray(snap.grid_alpha) * max_level).astype(np.int64)
    return _stats_from_counts(_joint_counts(np.asarray(snap.grid_strategy), level, snap.kappa), snap.step, snap.kappa)


def alpha_levels_present(stats: PopulationStats, threshold: float = 0.0) -> int:
    """Number of abstention levels held by more than ``threshold`` of the population."""
    return sum(1 for freq in stats.alpha_histogram if freq > threshold)


def sampling_schedule(step_count: int, sampling: SamplingSpec | str) -> list[int]:
    """
    Ascending steps at which stats are recorded; always contains 0 and step_count.

    dense-early: every step up to 1000, then round(10**(3 + k/50)) for k = 1, 2, ...
    every-k: multiples of k. all: every step.
    """
    if step_count < 0:
        raise ValueError(f"step_count must be >= 0, got {step_count}")
    if isinstance(sampling, str):
        sampling = SamplingSpec.model_validate(sampling)

    if sampling.mode == SamplingMode.ALL:
        steps = set(range(step_count + 1))
    elif sampling.mode == SamplingMode.EVERY_K:
        steps = set(range(0, step_count + 1, sampling.k))
    else:
        steps = set(range(min(step_count, DENSE_HORIZON) + 1))
        k = 1
        while True:
            step = round(10 ** (math.log10(DENSE_HORIZON) + k / POINTS_PER_DECADE))
            if step > step_count:
                break
            steps.add(step)
            k += 1
    steps.add(step_count)
    return sorted(steps)
