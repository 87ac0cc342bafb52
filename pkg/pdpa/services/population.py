"""
Population initialization.

Draws are consumed in row-major site order, strategy first and then the
abstention level. PD places every agent at level 0 and skips the level draw.
"""
import logging

import numpy as np

from pdpa.core.errors import ConfigError
from pdpa.core.rng import RngStream
from pdpa.models.dto import KAPPA, InitScheme, LatticeConfig
from pdpa.models.enums import InitSchemeKind
from pdpa.models.lattice import Lattice

logger = logging.getLogger(__name__)


def level_weights(scheme: InitScheme, kappa: int = KAPPA) -> np.ndarray:
    """Probability of each level 0..2*kappa under the scheme."""
    levels = 2 * kappa + 1
    weights = np.zeros(levels)
    if scheme.kind == InitSchemeKind.PD:
        weights[0] = 1.0
    elif scheme.kind == InitSchemeKind.OPD:
        weights[0] = weights[-1] = 0.5
    elif scheme.kind == InitSchemeKind.PDPA:
        weights[:] = 1.0 / levels
    else:
        if len(scheme.weights) != levels:
            raise ConfigError(
                f"custom scheme needs {levels} weights, got {len(scheme.weights)}", key="scheme"
            )
        weights[:] = scheme.weights
    return weights


def _draw_levels(scheme: InitScheme, uniforms: np.ndarray, kappa: int) -> np.ndarray:
    max_level = 2 * kappa
    if scheme.kind == InitSchemeKind.OPD:
        return np.where(uniforms < 0.5, 0, max_level)
    if scheme.kind == InitSchemeKind.PDPA:
        return np.minimum((uniforms * (max_level + 1)).astype(np.int64), max_level)
    # inverse CDF over the custom table; a draw past the float-rounded total lands on the last positive level
    cumulative = np.cumsum(np.asarray(scheme.weights, dtype=np.float64))
    picked = np.searchsorted(cumulative, uniforms, side='right')
    last_positive = int(np.flatnonzero(np.asarray(scheme.weights) > 0)[-1])
    return np.minimum(picked, last_positive)


def initialize(scheme: InitScheme, config: LatticeConfig, rng: RngStream, kappa: int = KAPPA) -> Lattice:
    """
    Random lattice under an initialization scheme.

    Every agent cooperates or defects with probability 1/2; its abstention
    level follows the scheme.

    Raises:
        ConfigError: if a custom weight table does not match the level count.
    """
    level_weights(scheme, kappa)
    n = config.size
    shape = (config.height, config.width)
    if scheme.kind == InitSchemeKind.PD:
        uniforms = rng.take(n)
        strategy = (uniforms >= 0.5).astype(np.int8)
        level = np.zeros(n, dtype=np.int16)
    else:
        uniforms = rng.take(2 * n).reshape(n, 2)
        strategy = (uniforms[:, 0] >= 0.5).astype(np.int8)
        level = _draw_levels(scheme, uniforms[:, 1], kappa).astype(np.int16)
    logger.debug("Initialized %dx%d lattice with scheme %s", config.height, config.width, scheme)
    return Lattice(config, strategy.reshape(shape), level.reshape(shape), kappa)
