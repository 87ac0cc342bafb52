"""
Shared fixtures for the simulator tests.
"""

import pytest
from typer.testing import CliRunner

from pdpa.core.rng import RngStream
from pdpa.main import app as cli_app
from pdpa.models.dto import GameParams, LatticeConfig, RunConfig, SamplingSpec
from pdpa.models.enums import SamplingMode, Strategy
from pdpa.models.lattice import AgentState, Lattice


@pytest.fixture
def params():
    """Default game: T=1.4, L=0.4, K=0.1."""
    return GameParams()


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def small_config():
    return LatticeConfig(width=5, height=5)


@pytest.fixture
def all_cooperators(small_config):
    return Lattice.uniform(small_config, AgentState.of(Strategy.COOPERATE, 0))


@pytest.fixture
def center_defector(small_config):
    """5x5 pure cooperators with one pure defector at (2, 2)."""
    lattice = Lattice.uniform(small_config, AgentState.of(Strategy.COOPERATE, 0))
    lattice.set_state((2, 2), AgentState.of(Strategy.DEFECT, 0))
    return lattice


@pytest.fixture
def quick_run():
    """Small, fast RunConfig sampled at every step."""
    return RunConfig(
        lattice=LatticeConfig(width=12, height=12),
        step_count=30,
        sampling=SamplingSpec(mode=SamplingMode.ALL),
        seed=2024,
    )


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def cli():
    return cli_app


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "bundle"
    path.mkdir()
    return path
