"""
Evolution operators and the simulation loop.

Synchronous steps play every game first and then let every agent imitate the
unique best performer of its closed neighborhood, reading only pre-step
states. Asynchronous steps are N elementary updates with uniform selection
with replacement; each one plays fresh games for a focal agent and one random
neighbor and copies the neighbor through the Fermi rule when it did better.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

from pdpa.core.errors import ParameterError
from pdpa.core.rng import RngStream
from pdpa.models.dto import GameParams, RunConfig
from pdpa.models.enums import StationaryMeasure, SyncPlayMode, UpdateRule
from pdpa.models.lattice import DOWN, LEFT, RIGHT, UP, Lattice, SnapshotSet, neighbor_sites
from pdpa.models.results import SimResult
from pdpa.services import kernels
from pdpa.services.interaction import gather_utility, play_edge, utility_from_counts
from pdpa.services.metrics import population_stats, sampling_schedule, snapshot
from pdpa.services.population import initialize

logger = logging.getLogger(__name__)

StepOperator = Callable[[Lattice, GameParams, RngStream], Lattice]


def fermi_probability(u_x: float, u_y: float, K: float, kappa: int) -> float:
    """
    W = 1 / (1 + exp((u_x - u_y) / (kappa*K))), evaluated without overflow.

    Raises:
        ParameterError: if K <= 0 or kappa < 1.
    """
    if not K > 0:
        raise ParameterError(f"noise amplitude K must be > 0, got {K}", key="K")
    if kappa < 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}", key="kappa")
    z = (u_x - u_y) / (kappa * K)
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


# PHASE 1: utilities
def category_counts(categories: np.ndarray) -> np.ndarray:
    """(..., 4) payoff categories per incident play -> (..., 5) counts per category."""
    return np.stack([(categories == k).sum(axis=-1) for k in range(5)], axis=-1)


def utilities_from_categories(categories: np.ndarray, params: GameParams) -> np.ndarray:
    return utility_from_counts(category_counts(categories), params)


def sync_play_categories(lattice: Lattice, rng: RngStream, mode: SyncPlayMode = SyncPlayMode.EDGE) -> np.ndarray:
    """(height, width, 4) payoff category of every agent's play with each neighbor."""
    categories = np.empty((lattice.config.height, lattice.config.width, 4), dtype=np.int8)
    if mode == SyncPlayMode.EDGE:
        bound = 2 * 2 * lattice.size
        kernel = kernels.sync_edge_plays
    else:
        bound = 4 * 2 * lattice.size
        kernel = kernels.sync_directed_plays
    block = rng.reserve(bound)
    used = kernel(lattice.strategy, lattice.level, lattice.max_level, block, categories)
    rng.advance(used)
    return categories


def sync_play_categories_reference(
    lattice: Lattice, params: GameParams, rng: RngStream, mode: SyncPlayMode = SyncPlayMode.EDGE
) -> np.ndarray:
    """Same result and stream consumption as ``sync_play_categories``, one play_edge at a time."""
    categories = np.empty((lattice.config.height, lattice.config.width, 4), dtype=np.int8)
    for row in range(lattice.config.height):
        for col in range(lattice.config.width):
            site = (row, col)
            neighbors = neighbor_sites(lattice.config, site)
            focal = lattice.state_at(site)
            if mode == SyncPlayMode.DIRECTED:
                for slot, other in enumerate(neighbors):
                    outcome = play_edge(focal, lattice.state_at(other), params, rng)
                    categories[row, col, slot] = outcome.category_x
                continue
            for slot, back in ((RIGHT, LEFT), (DOWN, UP)):
                other = neighbors[slot]
                outcome = play_edge(focal, lattice.state_at(other), params, rng)
                categories[row, col, slot] = outcome.category_x
                categories[other[0], other[1], back] = outcome.category_y
    return categories


# PHASE 2: imitation
def _closed_neighborhood(grid: np.ndarray) -> np.ndarray:
    """Stack (self, up, down, left, right) along a new leading axis; works on batched grids."""
    return np.stack([
        grid,
        np.roll(grid, 1, axis=-2),
        np.roll(grid, -1, axis=-2),
        np.roll(grid, 1, axis=-1),
        np.roll(grid, -1, axis=-1),
    ])


def imitate_best(strategy: np.ndarray, level: np.ndarray, utility: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    New (strategy, level) grids: an agent adopts a neighbor's pre-step state only
    when that neighbor is the unique strict maximizer of its closed neighborhood.
    """
    cand_u = _closed_neighborhood(utility)
    best = cand_u.max(axis=0)
    ties = (cand_u == best).sum(axis=0)
    winner = cand_u.argmax(axis=0)
    adopt = (ties == 1) & (winner != 0)
    pick = winner[np.newaxis]
    new_strategy = np.take_along_axis(_closed_neighborhood(strategy), pick, axis=0)[0]
    new_level = np.take_along_axis(_closed_neighborhood(level), pick, axis=0)[0]
    return np.where(adopt, new_strategy, strategy), np.where(adopt, new_level, level)


def sync_step(
    lattice: Lattice, params: GameParams, rng: RngStream, mode: SyncPlayMode = SyncPlayMode.EDGE
) -> Lattice:
    """One synchronous step; returns a new lattice and leaves the input untouched."""
    categories = sync_play_categories(lattice, rng, mode)
    utility = utilities_from_categories(categories, params)
    strategy, level = imitate_best(lattice.strategy, lattice.level, utility)
    result = Lattice(lattice.config, strategy.astype(np.int8), level.astype(np.int16), lattice.kappa)
    result._neighbors = lattice._neighbors
    return result


def async_elementary_update(lattice: Lattice, params: GameParams, rng: RngStream) -> Lattice:
    """
    One elementary asynchronous update, applied in place.

    Draw order: focal site, its four plays, the neighbor slot, the neighbor's
    four plays, then the Fermi draw only when u_y > u_x.
    """
    width = lattice.config.width
    flat = rng.integer(lattice.size)
    x = divmod(flat, width)
    u_x = gather_utility(lattice, x, params, rng)
    y = neighbor_sites(lattice.config, x)[rng.integer(4)]
    u_y = gather_utility(lattice, y, params, rng)
    if u_y > u_x:
        if rng.uniform() < fermi_probability(u_x, u_y, params.K, params.kappa):
            lattice.set_state(x, lattice.state_at(y))
    return lattice


def async_step(lattice: Lattice, params: GameParams, rng: RngStream) -> Lattice:
    """N = width*height elementary updates, in place, through the compiled kernel."""
    strategy = lattice.strategy.reshape(-1)
    level = lattice.level.reshape(-1)
    payoffs = np.asarray(params.payoffs, dtype=np.float64)
    scale = params.kappa * params.K
    remaining = lattice.size
    while remaining > 0:
        block = rng.reserve(min(kernels.MAX_DRAWS_PER_ASYNC_UPDATE * remaining, 1 << 20))
        done, used = kernels.async_updates(
            strategy, level, lattice.neighbors, lattice.max_level, payoffs, scale, block, remaining
        )
        rng.advance(used)
        remaining -= done
    return lattice


def step_operator(config: RunConfig) -> StepOperator:
    if config.rule == UpdateRule.ASYNCHRONOUS:
        return async_step
    mode = config.sync_plays

    def _sync(lattice: Lattice, params: GameParams, rng: RngStream) -> Lattice:
        return sync_step(lattice, params, rng, mode)
    return _sync


def run_simulation(
    config: RunConfig,
    on_step: Optional[Callable[[int, int], None]] = None,
) -> SimResult:
    """
    Initialize, evolve for step_count steps and record stats on the sampling schedule.

    Args:
        config: validated run configuration.
        on_step: optional callback (step, step_count) after each step.
    """
    logger.info(
        "Run seed=%d rule=%s scheme=%s T=%s L=%s steps=%d digest=%s",
        config.seed, config.rule, config.scheme, config.game.T, config.game.L,
        config.step_count, config.digest()[:12],
    )
    rng = RngStream(config.seed)
    lattice = initialize(config.scheme, config.lattice, rng, config.game.kappa)
    draws_at_init = rng.position
    schedule = set(sampling_schedule(config.step_count, config.sampling))
    snapshot_steps = set(config.snapshot_steps)
    window_start = max(0, config.step_count - config.window + 1)
    window: list[tuple[float, float]] = []

    series = []
    snapshots: dict[int, SnapshotSet] = {}
    initial = lattice.copy()
    operator = step_operator(config)

    for step in range(config.step_count + 1):
        if step > 0:
            lattice = operator(lattice, config.game, rng)
            if on_step is not None:
                on_step(step, config.step_count)
        want_stats = step in schedule
        in_window = config.measure == StationaryMeasure.WINDOW and step >= window_start
        if want_stats or in_window:
            stats = population_stats(lattice, step)
            if want_stats:
                series.append(stats)
                logger.debug(
                    "step %d: <epsilon>=%.6f <alpha>=%.6f", step, stats.mean_epsilon, stats.mean_alpha
                )
            if in_window:
                window.append((stats.mean_epsilon, stats.mean_alpha))
        if step in snapshot_steps:
            snapshots[step] = snapshot(lattice, step)

    if config.measure == StationaryMeasure.WINDOW:
        stationary = (
            math.fsum(e for e, _ in window) / len(window),
            math.fsum(a for _, a in window) / len(window),
        )
    else:
        stationary = (series[-1].mean_epsilon, series[-1].mean_alpha)

    return SimResult(
        series=series,
        initial=initial,
        final=lattice,
        snapshots=snapshots,
        seed=config.seed,
        config_digest=config.digest(),
        draws_at_init=draws_at_init,
        draws_after_init=rng.position - draws_at_init,
        stationary=stationary,
    )
