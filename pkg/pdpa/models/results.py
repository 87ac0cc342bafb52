"""
Run-level result containers that hold numpy-backed lattices, so they are plain
dataclasses rather than pydantic models.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from pdpa.models.dto import PopulationStats
from pdpa.models.lattice import Lattice, SnapshotSet


@dataclass
class SimResult:
    """
    Outcome of one simulation.

    Attributes:
        series: sampled stats, steps strictly increasing, last one at step_count.
        initial: lattice right after initialization.
        final: lattice after the last step.
        snapshots: grids kept at the configured snapshot steps.
        seed: the run seed.
        config_digest: RunConfig.digest() of the run.
        draws_at_init: stream position once initialization finished.
        draws_after_init: doubles consumed by the evolution steps.
        stationary: (mean_epsilon, mean_alpha) reported to aggregates.
    """
    series: list[PopulationStats]
    initial: Lattice
    final: Lattice
    snapshots: dict[int, SnapshotSet] = field(default_factory=dict)
    seed: int = 0
    config_digest: str = ""
    draws_at_init: int = 0
    draws_after_init: int = 0
    stationary: tuple[float, float] = (0.0, 0.0)

    @property
    def steps(self) -> list[int]:
        return [stats.step for stats in self.series]
