"""
Single plays of the game with probabilistic abstention.

Each endpoint of a play takes part independently with probability 1 - alpha.
x decides first; y is only asked when x takes part. An endpoint whose alpha is
exactly 0 or 1 decides without consuming randomness, so populations without
intermediate levels play on a draw-free path.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pdpa.core.rng import RngStream
from pdpa.models.dto import GameParams
from pdpa.models.enums import PayoffCategory
from pdpa.models.lattice import AgentState, Lattice, Site, neighbor_sites
from pdpa.services import kernels

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class EdgeOutcome:
    played: bool
    payoff_x: float
    payoff_y: float
    category_x: PayoffCategory
    category_y: PayoffCategory


def interaction_probability(alpha_x: float, alpha_y: float) -> float:
    """Probability that both endpoints take part: (1 - alpha_x)(1 - alpha_y)."""
    if not (0.0 <= alpha_x <= 1.0 and 0.0 <= alpha_y <= 1.0):
        raise ValueError(f"abstention probabilities must lie in [0, 1], got {alpha_x}, {alpha_y}")
    return (1.0 - alpha_x) * (1.0 - alpha_y)


def _takes_part(state: AgentState, rng: RngStream) -> bool:
    level = state.alpha.level
    if level == 0:
        return True
    if level == state.alpha.max_level:
        return False
    return rng.uniform() < 1.0 - float(state.alpha)


def play_category(x: AgentState, y: AgentState) -> tuple[PayoffCategory, PayoffCategory]:
    """PD matrix categories of a play that did happen."""
    sx, sy = int(x.strategy), int(y.strategy)
    return PayoffCategory(2 * sx + sy), PayoffCategory(2 * sy + sx)


def play_edge(x: AgentState, y: AgentState, params: GameParams, rng: RngStream) -> EdgeOutcome:
    """One play between x and y; both get L unless both take part."""
    if _takes_part(x, rng) and _takes_part(y, rng):
        cat_x, cat_y = play_category(x, y)
        return EdgeOutcome(True, params.payoff(cat_x), params.payoff(cat_y), cat_x, cat_y)
    loner = PayoffCategory.LONER
    return EdgeOutcome(False, params.L, params.L, loner, loner)


def expected_edge_payoff(x: AgentState, y: AgentState, params: GameParams) -> tuple[float, float]:
    """Analytic mean payoffs: q*M[s_x, s_y] + (1 - q)*L with q the interaction probability."""
    q = interaction_probability(float(x.alpha), float(y.alpha))
    cat_x, cat_y = play_category(x, y)
    return (
        q * params.payoff(cat_x) + (1.0 - q) * params.L,
        q * params.payoff(cat_y) + (1.0 - q) * params.L,
    )


def utility_from_counts(counts, params: GameParams):
    """
    nR*R + nS*S + nT*T + nP*P + nL*L.

    Works on scalars and on arrays of counts with a trailing axis of five; the
    fixed evaluation order makes equal outcome multisets compare equal.
    """
    R, S, T, P, L = params.payoffs
    return counts[..., 0] * R + counts[..., 1] * S + counts[..., 2] * T + counts[..., 3] * P + counts[..., 4] * L


def gather_utility(lattice: Lattice, site: Site, params: GameParams, rng: RngStream) -> float:
    """Utility of the agent at site from four fresh plays, neighbors visited up, down, left, right."""
    focal = lattice.state_at(site)
    counts = np.zeros(5, dtype=np.int64)
    for other in neighbor_sites(lattice.config, site):
        outcome = play_edge(focal, lattice.state_at(other), params, rng)
        counts[outcome.category_x] += 1
    return float(utility_from_counts(counts, params))


def sample_edge_payoffs(
    x: AgentState, y: AgentState, params: GameParams, rng: RngStream, n_plays: int
) -> tuple[np.ndarray, np.ndarray]:
    """Payoffs of n_plays independent plays of the same pair, drawn by the batch kernel."""
    out_x = np.empty(n_plays, dtype=np.float64)
    out_y = np.empty(n_plays, dtype=np.float64)
    payoffs = np.asarray(params.payoffs, dtype=np.float64)
    filled = 0
    while filled < n_plays:
        block = rng.reserve(min(kernels.MAX_DRAWS_PER_PLAY * (n_plays - filled), 1 << 20))
        done, used = kernels.play_edge_batch(
            int(x.strategy), x.alpha.level, int(y.strategy), y.alpha.level, x.alpha.max_level,
            payoffs, block, n_plays - filled, out_x, out_y, filled,
        )
        rng.advance(used)
        filled += done
    return out_x, out_y
