"""
Readers for output bundles and configs, used by the tests to look inside what
the commands write.
"""

import csv
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel

from pdpa.utils.config_parser import dump_config


def read_timeseries(path: Path | str) -> list[dict[str, float]]:
    """Rows of a time series file as floats keyed by column (step as int)."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return [{key: (int(value) if key == "step" else float(value)) for key, value in row.items()} for row in rows]


def read_grid(path: Path | str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def read_manifest(path: Path | str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return yaml.safe_load(handle)


def config_yaml(config: BaseModel) -> str:
    """YAML text of a config, as a user would write it in a --config file."""
    return yaml.safe_dump(dump_config(config), sort_keys=False, default_flow_style=False)
