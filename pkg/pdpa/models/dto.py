"""
Data Transfer Objects: validated configuration and result records.

Configuration objects (LatticeConfig, GameParams, InitScheme, SamplingSpec,
RunConfig, SweepSpec) reject unknown keys and validate ranges on construction,
so a bad config never reaches the engine. Result records (PopulationStats,
AggregateCell, AggregateResult) are frozen once built.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from pdpa.models.enums import (
    GameMode,
    InitSchemeKind,
    PayoffCategory,
    SamplingMode,
    StationaryMeasure,
    SyncPlayMode,
    UpdateRule,
)

logger = logging.getLogger(__name__)

KAPPA = 4
DEFAULT_SIZE = 102
DEFAULT_STEPS = 100_000
DEFAULT_REPLICATES = 100
DEFAULT_SEED = 1
WEIGHT_TOLERANCE = 1e-12


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# LATTICE
class LatticeConfig(_Frozen):
    """
    Toroidal square lattice with the von Neumann neighborhood.

    Attributes:
        width (int): number of columns (>= 3 so the four neighbors are distinct).
        height (int): number of rows (>= 3).
    """
    width: int = Field(DEFAULT_SIZE, ge=3)
    height: int = Field(DEFAULT_SIZE, ge=3)

    @property
    def kappa(self) -> int:
        return KAPPA

    @property
    def size(self) -> int:
        return self.width * self.height


# GAME
class GameParams(_Frozen):
    """
    Payoff constants and imitation noise of the weak prisoner's dilemma with a loner option.

    R, P and S are fixed by the game (1, 0, 0); T and L are the free axes.
    In strict mode T and L must satisfy 1 < T < 2 and 0 < L < 1; sweep mode also
    admits the closed endpoints and logs a warning when one is used.
    """
    mode: GameMode = GameMode.STRICT
    T: float = 1.4
    R: float = 1.0
    P: float = 0.0
    S: float = 0.0
    L: float = 0.4
    K: float = Field(0.1, gt=0)
    kappa: Literal[4] = KAPPA

    @field_validator('R')
    @classmethod
    def check_reward(cls, v: float) -> float:
        if v != 1.0:
            raise ValueError("reward R is fixed at 1")
        return v

    @field_validator('P', 'S')
    @classmethod
    def check_zero_payoffs(cls, v: float, info: ValidationInfo) -> float:
        if v != 0.0:
            raise ValueError(f"{info.field_name} is fixed at 0")
        return v

    @field_validator('T')
    @classmethod
    def check_temptation(cls, v: float, info: ValidationInfo) -> float:
        mode = info.data.get('mode', GameMode.STRICT)
        if mode == GameMode.STRICT:
            if not 1.0 < v < 2.0:
                raise ValueError(f"temptation T={v} violates 1 < T < 2 (strict mode)")
        else:
            if not 1.0 <= v <= 2.0:
                raise ValueError(f"temptation T={v} violates 1 <= T <= 2 (sweep mode)")
            if v in (1.0, 2.0):
                logger.warning("Sweep mode: temptation T=%s sits on the dilemma boundary", v)
        return v

    @field_validator('L')
    @classmethod
    def check_loner(cls, v: float, info: ValidationInfo) -> float:
        mode = info.data.get('mode', GameMode.STRICT)
        if mode == GameMode.STRICT:
            if not 0.0 < v < 1.0:
                raise ValueError(f"loner's payoff L={v} violates 0 < L < 1 (strict mode)")
        else:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"loner's payoff L={v} violates 0 <= L <= 1 (sweep mode)")
            if v in (0.0, 1.0):
                logger.warning("Sweep mode: loner's payoff L=%s sits on the dilemma boundary", v)
        return v

    @property
    def payoffs(self) -> tuple[float, float, float, float, float]:
        """Payoff per PayoffCategory: (R, S, T, P, L)."""
        return (self.R, self.S, self.T, self.P, self.L)

    def payoff(self, category: PayoffCategory) -> float:
        return self.payoffs[category]

    def with_axes(self, T: float, L: float) -> GameParams:
        """Validated copy with new temptation and loner's payoff."""
        return GameParams.model_validate({**self.model_dump(), 'T': T, 'L': L})


class InitScheme(_Frozen):
    """
    Initialization scheme for abstention levels.

    Accepts the command-line spelling as input: ``pd``, ``opd``, ``pdpa`` or
    ``custom:w0,w1,...`` with one weight per level.
    """
    kind: InitSchemeKind = InitSchemeKind.PDPA
    weights: Optional[tuple[float, ...]] = None

    @model_validator(mode='before')
    @classmethod
    def from_text(cls, data: Any) -> Any:
        if isinstance(data, InitSchemeKind):
            return {'kind': data}
        if isinstance(data, str):
            text = data.strip().lower()
            if text.startswith('custom:'):
                raw = text.split(':', 1)[1]
                try:
                    weights = tuple(float(w) for w in raw.split(',') if w.strip())
                except ValueError:
                    raise ValueError(f"custom weights must be comma-separated numbers, got '{raw}'")
                return {'kind': InitSchemeKind.CUSTOM, 'weights': weights}
            return {'kind': text}
        return data

    @model_validator(mode='after')
    def check_weights(self) -> InitScheme:
        if self.kind == InitSchemeKind.CUSTOM:
            if not self.weights:
                raise ValueError("custom scheme requires a weight per alpha level")
            if any(w < 0 or not math.isfinite(w) for w in self.weights):
                raise ValueError("custom weights must be finite and non-negative")
            total = math.fsum(self.weights)
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise ValueError(f"custom weights must sum to 1 (got {total!r})")
        elif self.weights is not None:
            raise ValueError(f"scheme '{self.kind}' takes no weights")
        return self

    def __str__(self) -> str:
        if self.kind == InitSchemeKind.CUSTOM:
            return "custom:" + ",".join(repr(w) for w in self.weights)
        return str(self.kind)


class SamplingSpec(_Frozen):
    """When to record PopulationStats; parses ``dense-early``, ``all`` or ``every-k:<k>``."""
    mode: SamplingMode = SamplingMode.DENSE_EARLY
    k: Optional[int] = Field(None, ge=1)

    @model_validator(mode='before')
    @classmethod
    def from_text(cls, data: Any) -> Any:
        if isinstance(data, str):
            text = data.strip().lower()
            if text.startswith('every-k'):
                _, _, raw = text.partition(':')
                if not raw:
                    raise ValueError("every-k sampling needs a period, e.g. every-k:10")
                try:
                    return {'mode': SamplingMode.EVERY_K, 'k': int(raw)}
                except ValueError:
                    raise ValueError(f"every-k period must be an integer, got '{raw}'")
            return {'mode': text}
        return data

    @model_validator(mode='after')
    def check_period(self) -> SamplingSpec:
        if self.mode == SamplingMode.EVERY_K and self.k is None:
            raise ValueError("every-k sampling needs a period k")
        if self.mode != SamplingMode.EVERY_K and self.k is not None:
            raise ValueError(f"sampling mode '{self.mode}' takes no period")
        return self

    def __str__(self) -> str:
        if self.mode == SamplingMode.EVERY_K:
            return f"every-k:{self.k}"
        return str(self.mode)


# RUNS
class RunConfig(_Frozen):
    """
    Everything that determines one reproducible simulation.

    Attributes:
        lattice: lattice geometry.
        game: payoff constants and noise.
        scheme: abstention initialization.
        rule: synchronous or asynchronous updating.
        sync_plays: edge-shared or directed plays under the synchronous rule.
        step_count: Monte Carlo steps after initialization.
        sampling: stats recording schedule.
        snapshot_steps: steps at which full lattice grids are kept.
        seed: 64-bit seed of the run's RngStream.
        measure: stationary value reported to aggregates (final step or window mean).
        window: trailing window length for the window measure.
    """
    lattice: LatticeConfig = LatticeConfig()
    game: GameParams = GameParams()
    scheme: InitScheme = InitScheme()
    rule: UpdateRule = UpdateRule.SYNCHRONOUS
    sync_plays: SyncPlayMode = SyncPlayMode.EDGE
    step_count: int = Field(DEFAULT_STEPS, ge=0)
    sampling: SamplingSpec = SamplingSpec()
    snapshot_steps: tuple[int, ...] = ()
    seed: int = Field(DEFAULT_SEED, ge=0, le=(1 << 64) - 1)
    measure: StationaryMeasure = StationaryMeasure.FINAL
    window: int = Field(1000, ge=1)

    @field_validator('snapshot_steps')
    @classmethod
    def check_snapshots(cls, v: tuple[int, ...], info: ValidationInfo) -> tuple[int, ...]:
        steps = info.data.get('step_count')
        for step in v:
            if step < 0 or (steps is not None and step > steps):
                raise ValueError(f"snapshot step {step} outside [0, {steps}]")
        return tuple(sorted(set(v)))

    @model_validator(mode='after')
    def check_scheme_levels(self) -> RunConfig:
        if self.scheme.kind == InitSchemeKind.CUSTOM:
            expected = 2 * self.game.kappa + 1
            if len(self.scheme.weights) != expected:
                raise ValueError(
                    f"custom scheme needs {expected} weights (one per alpha level), got {len(self.scheme.weights)}"
                )
        return self

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; identifies the config in metadata and manifests."""
        canonical = json.dumps(self.model_dump(mode='json'), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


class SweepSpec(_Frozen):
    """
    A grid of (T, L) cells, each run for a number of replicates per scheme and rule.

    Empty ``schemes`` / ``rules`` fall back to the base config's scheme / rule.
    """
    base: RunConfig = RunConfig()
    t_values: tuple[float, ...] = (1.1, 1.4, 1.9)
    l_values: tuple[float, ...] = (0.4,)
    schemes: tuple[InitScheme, ...] = ()
    rules: tuple[UpdateRule, ...] = ()
    replicates: int = Field(DEFAULT_REPLICATES, ge=1)
    master_seed: int = Field(DEFAULT_SEED, ge=0, le=(1 << 64) - 1)

    @field_validator('t_values', 'l_values')
    @classmethod
    def check_axes(cls, v: tuple[float, ...], info: ValidationInfo) -> tuple[float, ...]:
        if not v:
            raise ValueError("value list must not be empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("values must be strictly increasing")
        base = info.data.get('base')
        if base is not None:
            axis = 'T' if info.field_name == 't_values' else 'L'
            for value in v:
                params = {**base.game.model_dump(), axis: value}
                GameParams.model_validate(params)
        return v

    @field_validator('schemes')
    @classmethod
    def check_schemes(cls, v: tuple[InitScheme, ...], info: ValidationInfo) -> tuple[InitScheme, ...]:
        expected = 2 * KAPPA + 1
        for scheme in v:
            if scheme.kind == InitSchemeKind.CUSTOM and len(scheme.weights) != expected:
                raise ValueError(f"custom scheme needs {expected} weights")
        return v

    @property
    def resolved_schemes(self) -> tuple[InitScheme, ...]:
        return self.schemes or (self.base.scheme,)

    @property
    def resolved_rules(self) -> tuple[UpdateRule, ...]:
        return self.rules or (self.base.rule,)

    def cell_config(self, scheme: InitScheme, rule: UpdateRule, T: float, L: float, seed: int) -> RunConfig:
        """RunConfig of one replicate in one cell."""
        return self.base.model_copy(update={
            'game': self.base.game.with_axes(T, L),
            'scheme': scheme,
            'rule': rule,
            'seed': seed,
        })


# RESULTS
class PopulationStats(_Frozen):
    """
    Population aggregates at one step.

    Attributes:
        alpha_histogram: frequency of each abstention level (index = level).
        joint_histogram: frequencies over (strategy, level); row 0 cooperators, row 1 defectors.
        frac_*: agent classes; pure = alpha 0, sporadic = 0 < alpha < 1, loners = alpha 1.
    """
    step: int
    mean_epsilon: float
    mean_alpha: float
    frac_cooperate: float
    frac_defect: float
    alpha_histogram: tuple[float, ...]
    joint_histogram: tuple[tuple[float, ...], tuple[float, ...]]
    frac_pure_cooperators: float
    frac_sporadic_cooperators: float
    frac_pure_defectors: float
    frac_sporadic_defectors: float
    frac_loners: float


class AggregateCell(_Frozen):
    """Replicate aggregate for one (scheme, rule, T, L) cell; raw values kept for recomputation."""
    scheme: str
    rule: UpdateRule
    T: float
    L: float
    t_index: int
    l_index: int
    replicates: int
    mean_epsilon: float
    se_epsilon: float
    mean_alpha: float
    se_alpha: float
    seeds: tuple[int, ...]
    raw_epsilon: tuple[float, ...]
    raw_alpha: tuple[float, ...]


class AggregateResult(_Frozen):
    """All cells of a sweep, in (scheme, rule, L, T) order."""
    t_values: tuple[float, ...]
    l_values: tuple[float, ...]
    cells: tuple[AggregateCell, ...]

    def cell(self, scheme: str, rule: UpdateRule, t_index: int, l_index: int) -> AggregateCell:
        for cell in self.cells:
            if (cell.scheme, cell.rule, cell.t_index, cell.l_index) == (scheme, rule, t_index, l_index):
                return cell
        raise KeyError((scheme, rule, t_index, l_index))

    def groups(self) -> list[tuple[str, UpdateRule]]:
        """Distinct (scheme, rule) pairs in first-seen order."""
        seen: list[tuple[str, UpdateRule]] = []
        for cell in self.cells:
            key = (cell.scheme, cell.rule)
            if key not in seen:
                seen.append(key)
        return seen

    def matrices(self, scheme: str, rule: UpdateRule) -> tuple[np.ndarray, np.ndarray]:
        """Mean epsilon and mean alpha as (len(L), len(T)) matrices, row-major in (L, T)."""
        eps = np.full((len(self.l_values), len(self.t_values)), np.nan)
        alpha = np.full_like(eps, np.nan)
        for cell in self.cells:
            if cell.scheme == scheme and cell.rule == rule:
                eps[cell.l_index, cell.t_index] = cell.mean_epsilon
                alpha[cell.l_index, cell.t_index] = cell.mean_alpha
        return eps, alpha
