"""
Lattice population and per-agent value types.

The population is stored as two row-major numpy grids: the strategy code
(0 = cooperate, 1 = defect) and the abstention level index in [0, 2*kappa].
AgentState / AlphaLevel are the value-level view of one site.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from pdpa.core.errors import AlphaRangeError
from pdpa.models.dto import KAPPA, LatticeConfig
from pdpa.models.enums import Strategy

Site = tuple[int, int]

# (dr, dc) in the fixed neighbor order: up, down, left, right
NEIGHBOR_OFFSETS: tuple[Site, ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))
UP, DOWN, LEFT, RIGHT = range(4)


def alpha_value(level: int, kappa: int = KAPPA) -> Fraction:
    """
    Abstention probability of a level: exactly level / (2*kappa).

    Raises:
        AlphaRangeError: if kappa < 1 or level is outside [0, 2*kappa].
    """
    if kappa < 1:
        raise AlphaRangeError(f"kappa must be >= 1, got {kappa}")
    if not 0 <= level <= 2 * kappa:
        raise AlphaRangeError(f"alpha level {level} outside [0, {2 * kappa}]")
    return Fraction(level, 2 * kappa)


@dataclass(frozen=True, slots=True)
class AlphaLevel:
    level: int
    kappa: int = KAPPA

    def __post_init__(self) -> None:
        alpha_value(self.level, self.kappa)

    @property
    def value(self) -> Fraction:
        return alpha_value(self.level, self.kappa)

    @property
    def max_level(self) -> int:
        return 2 * self.kappa

    def __float__(self) -> float:
        return self.level / (2 * self.kappa)


@dataclass(frozen=True, slots=True)
class AgentState:
    strategy: Strategy
    alpha: AlphaLevel

    @classmethod
    def of(cls, strategy: int, level: int, kappa: int = KAPPA) -> AgentState:
        return cls(Strategy(strategy), AlphaLevel(level, kappa))


def effective_cooperation(state: AgentState) -> float:
    """epsilon = (1 - s)(1 - alpha)."""
    return float((1 - int(state.strategy)) * (1 - state.alpha.value))


def neighbor_sites(config: LatticeConfig, site: Site) -> tuple[Site, Site, Site, Site]:
    """The four von Neumann neighbors with periodic wrap, ordered (up, down, left, right)."""
    row, col = site
    if not (0 <= row < config.height and 0 <= col < config.width):
        raise ValueError(f"site {site} outside {config.height}x{config.width} lattice")
    return tuple(
        ((row + dr) % config.height, (col + dc) % config.width) for dr, dc in NEIGHBOR_OFFSETS
    )


def neighbor_table(config: LatticeConfig) -> np.ndarray:
    """(N, 4) int64 table of flat neighbor indices in (up, down, left, right) order."""
    rows, cols = np.divmod(np.arange(config.size, dtype=np.int64), config.width)
    table = np.empty((config.size, 4), dtype=np.int64)
    for slot, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        table[:, slot] = ((rows + dr) % config.height) * config.width + (cols + dc) % config.width
    return table


class Lattice:
    """
    Toroidal population of agents.

    Attributes:
        config: geometry of the grid.
        strategy: (height, width) int8 grid of strategy codes.
        level: (height, width) int16 grid of abstention level indices.
    """

    def __init__(self, config: LatticeConfig, strategy: np.ndarray, level: np.ndarray, kappa: int = KAPPA):
        shape = (config.height, config.width)
        if strategy.shape != shape or level.shape != shape:
            raise ValueError(f"grids must have shape {shape}")
        if strategy.size and (strategy.min() < 0 or strategy.max() > 1):
            raise ValueError("strategy codes must be 0 or 1")
        if level.size and (level.min() < 0 or level.max() > 2 * kappa):
            raise AlphaRangeError(f"alpha levels must lie in [0, {2 * kappa}]")
        self.config = config
        self.kappa = kappa
        self.strategy = np.ascontiguousarray(strategy, dtype=np.int8)
        self.level = np.ascontiguousarray(level, dtype=np.int16)
        self._neighbors: np.ndarray | None = None

    @classmethod
    def from_states(cls, config: LatticeConfig, states: list[AgentState]) -> Lattice:
        """Build from a row-major list of AgentStates."""
        if len(states) != config.size:
            raise ValueError(f"expected {config.size} states, got {len(states)}")
        shape = (config.height, config.width)
        strategy = np.array([int(s.strategy) for s in states], dtype=np.int8).reshape(shape)
        level = np.array([s.alpha.level for s in states], dtype=np.int16).reshape(shape)
        kappa = states[0].alpha.kappa if states else KAPPA
        return cls(config, strategy, level, kappa)

    @classmethod
    def uniform(cls, config: LatticeConfig, state: AgentState) -> Lattice:
        """Homogeneous lattice where every site holds the same state."""
        shape = (config.height, config.width)
        return cls(
            config,
            np.full(shape, int(state.strategy), dtype=np.int8),
            np.full(shape, state.alpha.level, dtype=np.int16),
            state.alpha.kappa,
        )

    @property
    def max_level(self) -> int:
        return 2 * self.kappa

    @property
    def size(self) -> int:
        return self.config.size

    @property
    def neighbors(self) -> np.ndarray:
        if self._neighbors is None:
            self._neighbors = neighbor_table(self.config)
        return self._neighbors

    def state_at(self, site: Site) -> AgentState:
        row, col = site
        return AgentState(
            Strategy(int(self.strategy[row, col])),
            AlphaLevel(int(self.level[row, col]), self.kappa),
        )

    def set_state(self, site: Site, state: AgentState) -> None:
        row, col = site
        self.strategy[row, col] = int(state.strategy)
        self.level[row, col] = state.alpha.level

    def states(self) -> Iterator[AgentState]:
        """AgentStates in row-major order."""
        for row in range(self.config.height):
            for col in range(self.config.width):
                yield self.state_at((row, col))

    def alpha_grid(self) -> np.ndarray:
        return self.level / float(self.max_level)

    def epsilon_grid(self) -> np.ndarray:
        return (1 - self.strategy) * (1.0 - self.alpha_grid())

    def copy(self) -> Lattice:
        clone = Lattice(self.config, self.strategy.copy(), self.level.copy(), self.kappa)
        clone._neighbors = self._neighbors
        return clone

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return (
            self.config == other.config
            and self.kappa == other.kappa
            and np.array_equal(self.strategy, other.strategy)
            and np.array_equal(self.level, other.level)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Lattice({self.config.height}x{self.config.width}, kappa={self.kappa})"


@dataclass(frozen=True)
class SnapshotSet:
    """Per-site grids at one step: effective cooperation, abstention probability, strategy code."""
    step: int
    grid_epsilon: np.ndarray
    grid_alpha: np.ndarray
    grid_strategy: np.ndarray
    kappa: int = KAPPA
