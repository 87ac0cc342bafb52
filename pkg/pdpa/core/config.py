from __future__ import annotations

import os
from dataclasses import dataclass
from os import getenv
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


def _get_from_env(var_name: str, default: Optional[str] = None) -> str:
    value = getenv(var_name, default)
    if value is None:
        raise ValueError(f"Environment variable '{var_name}' must be set.")
    return value


def _positive_int_from_env(var_name: str, default: Optional[int]) -> Optional[int]:
    raw = getenv(var_name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"Environment variable '{var_name}' must be an integer, got '{raw}'.")
    if value < 1:
        raise ValueError(f"Environment variable '{var_name}' must be >= 1, got {value}.")
    return value


@dataclass(frozen=True)
class Config:
    THREADS: Optional[int]
    LOG_LEVEL: str
    LOG_FILE: Optional[str]
    OUTPUT_DIR: str
    RNG_BLOCK: int

    @staticmethod
    def get_config() -> Config:
        # Worker bound; None means "use every CPU"
        threads = _positive_int_from_env("PDPA_THREADS", None)

        log_level = _get_from_env("PDPA_LOG_LEVEL", "INFO").upper()
        log_file = getenv("PDPA_LOG_FILE", "") or None

        output_dir = _get_from_env("PDPA_OUTPUT_DIR", "results")
        rng_block = _positive_int_from_env("PDPA_RNG_BLOCK", 65536)

        return Config(threads, log_level, log_file, output_dir, rng_block)

    def worker_count(self, requested: Optional[int] = None) -> int:
        """Number of worker processes: the request (or CPU count) capped by PDPA_THREADS."""
        wanted = requested if requested is not None else (os.cpu_count() or 1)
        if self.THREADS is not None:
            wanted = min(wanted, self.THREADS)
        return max(1, wanted)


CONFIG = Config.get_config()
