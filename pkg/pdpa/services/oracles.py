"""
Self-checks of the engine against exact values and exact distributions.

Each check returns an OracleReport; ``run_selftest`` runs all of them. None of
them raises on a mismatch, the caller decides what a failure means.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from pdpa.core.rng import RngStream
from pdpa.models.dto import GameParams, InitScheme, LatticeConfig, RunConfig, SamplingSpec
from pdpa.models.enums import InitSchemeKind, SamplingMode, UpdateRule
from pdpa.models.lattice import AgentState, Lattice
from pdpa.services.dynamics import (
    async_elementary_update,
    async_step,
    fermi_probability,
    imitate_best,
    run_simulation,
    sync_play_categories,
    sync_play_categories_reference,
    sync_step,
)
from pdpa.services.interaction import expected_edge_payoff, sample_edge_payoffs, utility_from_counts
from pdpa.services.population import initialize

logger = logging.getLogger(__name__)

SIGMAS = 4.0
# floor for pairs whose payoff never varies
ABS_TOLERANCE = 1e-12

# 3x3 fixture with intermediate abstention levels everywhere but two sites
ORACLE_STRATEGY = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=np.int8)
ORACLE_LEVEL = np.array([[2, 4, 0], [6, 1, 3], [8, 5, 2]], dtype=np.int16)


@dataclass(frozen=True)
class OracleReport:
    name: str
    passed: bool
    detail: str
    checks: int = 1


def fermi_check() -> OracleReport:
    cases = [
        ((0.7, 0.7, 0.1, 4), 0.5),
        ((0.0, 0.4, 0.1, 4), 1.0 / (1.0 + math.exp(-1.0))),
        ((0.4, 0.0, 0.1, 4), 1.0 / (1.0 + math.exp(1.0))),
    ]
    worst = max(abs(fermi_probability(*args) - want) for args, want in cases)
    extremes = [fermi_probability(d, 0.0, 0.1, 4) for d in (-1e6, 1e6)]
    finite = all(math.isfinite(v) for v in extremes) and extremes[0] == 1.0 and extremes[1] == 0.0
    passed = worst <= 1e-9 and finite
    return OracleReport("fermi", passed, f"max error {worst:.3e}, extremes {extremes}", len(cases) + 2)


def edge_pair_mismatches(
    x: AgentState, y: AgentState, params: GameParams, rng: RngStream, n_plays: int
) -> list[str]:
    """
    Compare the Monte Carlo means of one pair with the analytic payoffs.

    Pairs with a fixed outcome (either endpoint at level 2*kappa, or both at
    level 0) give a sample std of rounding noise, so the tolerance has an
    absolute floor.
    """
    pay_x, pay_y = sample_edge_payoffs(x, y, params, rng, n_plays)
    want_x, want_y = expected_edge_payoff(x, y, params)
    mismatches = []
    for side, got, want in (("x", pay_x, want_x), ("y", pay_y, want_y)):
        se = float(got.std()) / math.sqrt(n_plays)
        tolerance = max(SIGMAS * se, ABS_TOLERANCE)
        mean = float(got.mean())
        if abs(mean - want) > tolerance:
            mismatches.append(f"{side}: mean {mean:.6f} vs {want:.6f} (tolerance {tolerance:.2e})")
    return mismatches


def edge_oracle(n_triples: int = 50, n_plays: int = 1_000_000, seed: int = 1) -> OracleReport:
    """Monte Carlo means of play_edge against the analytic expected payoffs."""
    rng = RngStream(seed)
    failures = []
    for i in range(n_triples):
        u = rng.take(6)
        x = AgentState.of(int(u[0] >= 0.5), min(int(u[1] * 9), 8))
        y = AgentState.of(int(u[2] >= 0.5), min(int(u[3] * 9), 8))
        params = GameParams(T=1.0 + 0.98 * u[4] + 0.01, L=0.98 * u[5] + 0.01)
        failures.extend(f"triple {i} {m}" for m in edge_pair_mismatches(x, y, params, rng, n_plays))
    detail = "; ".join(failures[:3]) if failures else f"{n_triples} triples x {n_plays} plays within {SIGMAS:g} SE"
    return OracleReport("edge-play", not failures, detail, 2 * n_triples)


def _outcome_keys(strategy: np.ndarray, level: np.ndarray, kappa: int) -> np.ndarray:
    """One int64 per (batched) lattice: site states in base 2*(2*kappa+1), row-major."""
    base = 2 * (2 * kappa + 1)
    states = strategy.astype(np.int64) * (2 * kappa + 1) + level.astype(np.int64)
    flat = states.reshape(states.shape[:-2] + (-1,))
    weights = base ** np.arange(flat.shape[-1] - 1, -1, -1, dtype=np.int64)
    return flat @ weights


def exact_sync_distribution(lattice: Lattice, params: GameParams) -> dict[int, float]:
    """
    Exact distribution of one edge-mode sync_step over post-step lattices.

    Enumerates the played/abstained status of every undirected edge; feasible
    only for tiny lattices (2**(2N) patterns).
    """
    height, width = lattice.config.height, lattice.config.width
    max_level = lattice.max_level
    edges = []
    for r in range(height):
        for c in range(width):
            edges.append(((r, c), (r, (c + 1) % width), 3, 2))
            edges.append(((r, c), ((r + 1) % height, c), 1, 0))
    n_edges = len(edges)
    patterns = ((np.arange(1 << n_edges)[:, None] >> np.arange(n_edges)) & 1).astype(bool)

    probability = np.ones(patterns.shape[0])
    categories = np.full((patterns.shape[0], height, width, 4), 4, dtype=np.int8)
    for e, (a, b, slot_a, slot_b) in enumerate(edges):
        q = (1.0 - lattice.level[a] / max_level) * (1.0 - lattice.level[b] / max_level)
        played = patterns[:, e]
        probability *= np.where(played, q, 1.0 - q)
        sa, sb = int(lattice.strategy[a]), int(lattice.strategy[b])
        categories[played, a[0], a[1], slot_a] = 2 * sa + sb
        categories[played, b[0], b[1], slot_b] = 2 * sb + sa

    counts = np.stack([(categories == k).sum(axis=-1) for k in range(5)], axis=-1)
    utility = utility_from_counts(counts, params)
    shape = (patterns.shape[0], height, width)
    strategy, level = imitate_best(
        np.broadcast_to(lattice.strategy, shape), np.broadcast_to(lattice.level, shape), utility
    )
    keys = _outcome_keys(strategy, level, lattice.kappa)
    unique, inverse = np.unique(keys, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=probability, minlength=unique.size)
    return {int(k): float(p) for k, p in zip(unique, mass) if p > 0}


def sync_distribution_oracle(trials: int = 100_000, seed: int = 7) -> OracleReport:
    """Empirical sync_step outcome frequencies on the 3x3 fixture against exact enumeration."""
    config = LatticeConfig(width=3, height=3)
    lattice = Lattice(config, ORACLE_STRATEGY.copy(), ORACLE_LEVEL.copy())
    params = GameParams()
    exact = exact_sync_distribution(lattice, params)

    rng = RngStream(seed)
    observed: dict[int, int] = {}
    for _ in range(trials):
        after = sync_step(lattice, params, rng)
        key = int(_outcome_keys(after.strategy, after.level, after.kappa))
        observed[key] = observed.get(key, 0) + 1

    failures = [f"outcome {k} has zero exact probability" for k in observed if k not in exact]
    for key, p in exact.items():
        freq = observed.get(key, 0) / trials
        tolerance = SIGMAS * math.sqrt(p * (1.0 - p) / trials) + 1.0 / trials
        if abs(freq - p) > tolerance:
            failures.append(f"outcome {key}: frequency {freq:.5f} vs exact {p:.5f}")
    total = math.fsum(exact.values())
    if abs(total - 1.0) > 1e-9:
        failures.append(f"exact probabilities sum to {total!r}")
    detail = "; ".join(failures[:3]) if failures else (
        f"{len(exact)} outcomes, {trials} trials within {SIGMAS:g} SE"
    )
    return OracleReport("sync-distribution", not failures, detail, len(exact))


def kernel_equivalence_check(seed: int = 11, steps: int = 3) -> OracleReport:
    """Compiled kernels against the scalar reference operations: same states, same stream position."""
    config = LatticeConfig(width=6, height=5)
    params = GameParams()
    rng = RngStream(seed)

    start = initialize(InitScheme(kind=InitSchemeKind.PDPA), config, rng)
    failures = []

    fast_rng, slow_rng = RngStream(seed + 1), RngStream(seed + 1)
    for _ in range(steps):
        fast = sync_play_categories(start, fast_rng)
        slow = sync_play_categories_reference(start, params, slow_rng)
        if not np.array_equal(fast, slow) or fast_rng.position != slow_rng.position:
            failures.append("sync plays differ")
            break

    fast_lattice, slow_lattice = start.copy(), start.copy()
    fast_rng, slow_rng = RngStream(seed + 2), RngStream(seed + 2)
    for _ in range(steps):
        async_step(fast_lattice, params, fast_rng)
        for _ in range(slow_lattice.size):
            async_elementary_update(slow_lattice, params, slow_rng)
    if fast_lattice != slow_lattice or fast_rng.position != slow_rng.position:
        failures.append("async updates differ")

    detail = "; ".join(failures) if failures else f"{steps} sync and {steps} async steps identical"
    return OracleReport("kernel-equivalence", not failures, detail, 2)


def closure_check(seed: int = 3, steps: int = 200, size: int = 20) -> OracleReport:
    """PD stays at alpha = 0 without draws after initialization; OPD stays in {0, 1}."""
    failures = []
    base = RunConfig(
        lattice=LatticeConfig(width=size, height=size),
        step_count=steps,
        sampling=SamplingSpec(mode=SamplingMode.ALL),
        seed=seed,
    )
    for rule in UpdateRule:
        pd = run_simulation(base.model_copy(update={'scheme': InitScheme(kind=InitSchemeKind.PD), 'rule': rule}))
        if any(s.mean_alpha != 0.0 for s in pd.series):
            failures.append(f"PD/{rule}: alpha left 0")
        if rule == UpdateRule.SYNCHRONOUS and pd.draws_after_init != 0:
            failures.append(f"PD/sync consumed {pd.draws_after_init} draws after initialization")
        opd = run_simulation(base.model_copy(update={'scheme': InitScheme(kind=InitSchemeKind.OPD), 'rule': rule}))
        for s in opd.series:
            if any(freq > 0 for freq in s.alpha_histogram[1:-1]):
                failures.append(f"OPD/{rule}: intermediate alpha at step {s.step}")
                break
    detail = "; ".join(failures) if failures else f"PD and OPD closed over {steps} steps under both rules"
    return OracleReport("closure", not failures, detail, 4)


def run_selftest(quick: bool = False, seed: int = 1) -> list[OracleReport]:
    """Every oracle; ``quick`` shrinks the sample sizes."""
    checks: list[Callable[[], OracleReport]] = [
        fermi_check,
        lambda: edge_oracle(10 if quick else 50, 100_000 if quick else 1_000_000, seed),
        lambda: sync_distribution_oracle(20_000 if quick else 100_000, seed + 6),
        lambda: kernel_equivalence_check(seed + 10),
        lambda: closure_check(seed + 2, 50 if quick else 200),
    ]
    reports = []
    for check in checks:
        report = check()
        logger.info("Oracle %s: %s (%s)", report.name, "ok" if report.passed else "FAILED", report.detail)
        reports.append(report)
    return reports
