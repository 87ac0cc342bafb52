"""
Resolution of command-line flags and YAML config files into validated configs.

Precedence, lowest first: model defaults, preset, config file, flags. A
manifest written by a previous command is accepted as a config file; its
``config`` section is used.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Optional, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from pdpa.core.errors import ConfigError
from pdpa.models.dto import RunConfig, SweepSpec
from pdpa.models.enums import GameMode

logger = logging.getLogger(__name__)

Model = TypeVar("Model", bound=BaseModel)

PRESETS: dict[str, dict[str, Any]] = {
    "paper": {"lattice": {"width": 102, "height": 102}, "step_count": 100_000, "replicates": 100},
    "desk": {"lattice": {"width": 50, "height": 50}, "step_count": 20_000, "replicates": 20},
}

TL_T_VALUES = tuple(round(1.0 + 0.05 * i, 2) for i in range(21))
TL_L_VALUES = tuple(round(0.05 * i, 2) for i in range(21))

RUN_KEYS = set(RunConfig.model_fields)


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _prune(data: dict[str, Any]) -> dict[str, Any]:
    """Drop flags that were not given (None) and sections left empty."""
    pruned = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = _prune(value)
            if not value:
                continue
        elif value is None:
            continue
        pruned[key] = value
    return pruned


def load_config_file(path: Path | str) -> dict[str, Any]:
    """Mapping read from a YAML config file or manifest."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}", key="config")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}", key="config")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping", key="config")
    if "artifact_version" in data and "config" in data:
        logger.info("Reading configuration from manifest %s", path)
        return data["config"] or {}
    return data


def manifest_options(path: Optional[Path | str]) -> dict[str, Any]:
    """Command options recorded by a manifest; empty for plain config files."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except (OSError, yaml.YAMLError):
        return {}
    if isinstance(data, dict) and "artifact_version" in data:
        return data.get("options") or {}
    return {}


def validate(model: type[Model], data: dict[str, Any]) -> Model:
    """model.model_validate with pydantic errors turned into a ConfigError naming the key."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or None
        message = first["msg"]
        if len(e.errors()) > 1:
            message += f" (+{len(e.errors()) - 1} more)"
        raise ConfigError(message, key=key) from e


def run_overrides(
    size: Optional[int] = None,
    steps: Optional[int] = None,
    rule: Optional[str] = None,
    scheme: Optional[str] = None,
    T: Optional[float] = None,
    L: Optional[float] = None,
    K: Optional[float] = None,
    mode: Optional[GameMode] = None,
    seed: Optional[int] = None,
    sampling: Optional[str] = None,
    snapshot_steps: Optional[tuple[int, ...]] = None,
    measure: Optional[str] = None,
    window: Optional[int] = None,
    sync_plays: Optional[str] = None,
) -> dict[str, Any]:
    """RunConfig-shaped mapping of the flags that were given."""
    return _prune({
        "lattice": {"width": size, "height": size},
        "game": {"mode": mode, "T": T, "L": L, "K": K},
        "scheme": scheme,
        "rule": rule,
        "sync_plays": sync_plays,
        "step_count": steps,
        "sampling": sampling,
        "snapshot_steps": snapshot_steps,
        "seed": seed,
        "measure": measure,
        "window": window,
    })


def _with_default_mode(data: dict[str, Any], default_mode: GameMode) -> dict[str, Any]:
    game = data.get("game") or {}
    if "mode" in game:
        return data
    return _merge(data, {"game": {"mode": str(default_mode)}})


def parse_config(
    overrides: dict[str, Any],
    config_file: Optional[Path | str] = None,
    preset: Optional[str] = None,
    default_mode: GameMode = GameMode.STRICT,
) -> RunConfig:
    """
    RunConfig from flags over file over preset over defaults.

    Raises:
        ConfigError: unknown key, type mismatch or range violation.
    """
    data: dict[str, Any] = {}
    if preset is not None:
        data = {k: v for k, v in _preset(preset).items() if k in RUN_KEYS}
    if config_file is not None:
        file_data = load_config_file(config_file)
        if "base" in file_data:
            raise ConfigError("sweep configuration given to a single-run command", key="base")
        data = _merge(data, file_data)
    data = _merge(data, overrides)
    return validate(RunConfig, _with_default_mode(data, default_mode))


def parse_sweep(
    overrides: dict[str, Any],
    base_overrides: dict[str, Any],
    config_file: Optional[Path | str] = None,
    preset: Optional[str] = None,
    default_mode: GameMode = GameMode.STRICT,
    default_axes: Optional[dict[str, tuple[float, ...]]] = None,
) -> SweepSpec:
    """
    SweepSpec with the same precedence as ``parse_config``; ``base_overrides``
    target the base RunConfig, ``overrides`` the sweep fields.
    """
    data: dict[str, Any] = dict(default_axes or {})
    if preset is not None:
        chosen = _preset(preset)
        data = _merge(data, {
            "base": {k: v for k, v in chosen.items() if k in RUN_KEYS},
            "replicates": chosen["replicates"],
        })
    if config_file is not None:
        file_data = load_config_file(config_file)
        if file_data and "base" not in file_data and set(file_data) <= RUN_KEYS:
            file_data = {"base": file_data}
        data = _merge(data, file_data)
    data = _merge(data, overrides)
    if base_overrides:
        data = _merge(data, {"base": base_overrides})
    data["base"] = _with_default_mode(data.get("base") or {}, default_mode)
    return validate(SweepSpec, data)


def _preset(name: str) -> dict[str, Any]:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})", key="preset")


def dump_config(config: BaseModel) -> dict[str, Any]:
    """JSON-compatible mapping that ``parse_config`` / ``parse_sweep`` read back to an equal model."""
    return config.model_dump(mode="json")
