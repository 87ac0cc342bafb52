"""
Deterministic random stream shared by every stochastic operation.

The stream is the sequence of doubles produced by numpy's PCG64 bit generator
through ``Generator.random``. Doubles are fetched in blocks and served from a
buffer; a block of n doubles is the same sequence as n scalar draws, so kernels
that work on reserved blocks and scalar callers see identical values at
identical positions.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .config import CONFIG

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


class RngStream:
    """Seeded PCG64 stream with draw accounting.

    Attributes:
        seed: the 64-bit seed the stream was built from.
        position: number of doubles consumed so far.
    """

    def __init__(self, seed: int, block_size: Optional[int] = None):
        if seed < 0 or seed > SEED_MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.position = 0
        self._block_size = block_size or CONFIG.RNG_BLOCK
        self._generator = np.random.Generator(np.random.PCG64(self.seed))
        self._buffer = np.empty(0, dtype=np.float64)
        self._cursor = 0

    def _ensure(self, n: int) -> None:
        available = self._buffer.size - self._cursor
        if available >= n:
            return
        fresh = self._generator.random(max(self._block_size, n - available))
        self._buffer = np.concatenate((self._buffer[self._cursor:], fresh))
        self._cursor = 0

    def uniform(self) -> float:
        """Next uniform real in [0, 1)."""
        if self._cursor >= self._buffer.size:
            self._ensure(1)
        value = float(self._buffer[self._cursor])
        self._cursor += 1
        self.position += 1
        return value

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n), one double per draw."""
        if n < 1:
            raise ValueError(f"integer range must be positive, got {n}")
        return min(int(self.uniform() * n), n - 1)

    def take(self, n: int) -> np.ndarray:
        """Consume the next n doubles as an array (copy)."""
        block = self.reserve(n)[:n].copy()
        self.advance(n)
        return block

    def reserve(self, n: int) -> np.ndarray:
        """View of at least n upcoming doubles without consuming them."""
        self._ensure(n)
        return self._buffer[self._cursor:]

    def advance(self, n: int) -> None:
        """Mark n reserved doubles as consumed."""
        if n < 0 or self._cursor + n > self._buffer.size:
            raise ValueError(f"cannot advance the stream by {n}")
        self._cursor += n
        self.position += n

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, position={self.position})"
