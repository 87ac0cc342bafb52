"""
Enumerations shared across the simulator.

Strategy is an IntEnum because its numeric code (0 = cooperate, 1 = defect)
enters the effective-cooperation formula and the payoff category arithmetic.
The remaining enums are StrEnums so they read and serialize as the same words
used on the command line and in config files.
"""

from enum import IntEnum, StrEnum


class Strategy(IntEnum):
    """Pure game strategy; s = 0 cooperates, s = 1 defects."""
    COOPERATE = 0
    DEFECT = 1


class PayoffCategory(IntEnum):
    """
    Outcome of one play seen from one endpoint.

    For a played edge the category is 2*s_self + s_other, which lines up with
    the PD matrix (R, S, T, P); LONER marks an edge where someone abstained.
    """
    REWARD = 0  # C vs C
    SUCKER = 1  # C vs D
    TEMPTATION = 2  # D vs C
    PUNISHMENT = 3  # D vs D
    LONER = 4


class InitSchemeKind(StrEnum):
    """How abstention levels are drawn at initialization."""
    PD = "pd"  # every alpha = 0
    OPD = "opd"  # alpha in {0, 1}, equiprobable
    PDPA = "pdpa"  # alpha uniform over all 2*kappa + 1 levels
    CUSTOM = "custom"  # explicit weight per level


class UpdateRule(StrEnum):
    SYNCHRONOUS = "sync"
    ASYNCHRONOUS = "async"


class SyncPlayMode(StrEnum):
    """How the synchronous rule plays its games."""
    EDGE = "edge"  # one shared play per undirected edge
    DIRECTED = "directed"  # every agent plays its own game with each neighbor


class GameMode(StrEnum):
    """Strict keeps the open dilemma ranges; sweep also admits the closed endpoints."""
    STRICT = "strict"
    SWEEP = "sweep"


class SamplingMode(StrEnum):
    DENSE_EARLY = "dense-early"
    EVERY_K = "every-k"
    ALL = "all"


class StationaryMeasure(StrEnum):
    """Which value a replicate contributes to an aggregate."""
    FINAL = "final"  # stats at the last step
    WINDOW = "window"  # mean over a trailing window of steps
