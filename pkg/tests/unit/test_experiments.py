"""
Tests for seed derivation, replicate aggregation and sweeps.
"""

import hashlib
import math
import struct

import numpy as np
import pytest

from pdpa.core.errors import ConfigError, SimulationError
from pdpa.models.dto import GameParams, InitScheme, LatticeConfig, RunConfig, SweepSpec
from pdpa.models.enums import GameMode, UpdateRule
from pdpa.services import experiments
from pdpa.services.experiments import (
    derive_seed,
    mean_and_se,
    run_replicates,
    sweep,
    sweep_temptation,
    sweep_tl,
    timecourse,
)


@pytest.fixture
def tiny_run():
    return RunConfig(lattice=LatticeConfig(width=6, height=6), step_count=4, seed=1)


@pytest.fixture
def tiny_sweep(tiny_run):
    return SweepSpec(base=tiny_run, t_values=(1.2, 1.6), l_values=(0.3,), replicates=2, master_seed=9)


class TestDeriveSeed:
    """Seed derivation from (master, t, l, replicate)."""

    def test_matches_sha256_definition(self):
        payload = struct.pack("<4Q", 42, 3, 7, 11)
        expected = int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")
        assert derive_seed(42, 3, 7, 11) == expected

    def test_fits_in_64_bits(self):
        assert 0 <= derive_seed((1 << 64) - 1, 20, 20, 99) < (1 << 64)

    def test_no_collisions_on_a_grid(self):
        seeds = {derive_seed(1, t, l, rep) for t in range(21) for l in range(21) for rep in range(23)}
        assert len(seeds) == 21 * 21 * 23

    def test_top_bits_roughly_uniform(self):
        n = 16_000
        bins = np.bincount([derive_seed(5, 0, 0, rep) >> 60 for rep in range(n)], minlength=16)
        expected = n / 16
        chi_square = float(((bins - expected) ** 2 / expected).sum())
        assert chi_square < 45

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            derive_seed(1, -1, 0, 0)


class TestMeanAndSe:

    def test_single_value(self):
        assert mean_and_se([0.3]) == (0.3, 0.0)

    def test_sample_standard_error(self):
        mean, se = mean_and_se([1.0, 2.0, 3.0, 4.0])
        assert mean == 2.5
        assert se == pytest.approx(math.sqrt((1.25 * 4 / 3) / 4))

    def test_constant_values(self):
        assert mean_and_se([0.1] * 7) == (0.1, 0.0)


class TestReplicates:
    """Replicate batches on the process pool."""

    def test_single_replicate_has_zero_se(self, tiny_run):
        cell = run_replicates(tiny_run, 1, master_seed=3, workers=1)
        assert cell.replicates == 1
        assert cell.se_epsilon == 0.0 and cell.se_alpha == 0.0
        assert cell.seeds == (derive_seed(3, 0, 0, 0),)

    def test_zero_replicates_rejected(self, tiny_run):
        with pytest.raises(ConfigError):
            run_replicates(tiny_run, 0, master_seed=3)

    def test_worker_count_does_not_change_result(self, tiny_run):
        serial = run_replicates(tiny_run, 4, master_seed=3, workers=1)
        parallel = run_replicates(tiny_run, 4, master_seed=3, workers=2)
        assert serial == parallel

    def test_failure_reports_seed(self, tiny_run, monkeypatch):
        def _boom(config, on_step=None):
            raise RuntimeError("lattice exploded")

        monkeypatch.setattr(experiments, "run_simulation", _boom)
        with pytest.raises(SimulationError) as info:
            run_replicates(tiny_run, 2, master_seed=3, workers=1)
        assert info.value.seed == derive_seed(3, 0, 0, 0)
        assert "lattice exploded" in str(info.value)


class TestSweeps:
    """Sweep grids and their ordering."""

    def test_temptation_sweep(self, tiny_sweep):
        result = sweep_temptation(tiny_sweep, workers=1)
        assert len(result.cells) == 2
        assert [c.T for c in result.cells] == [1.2, 1.6]
        assert all(c.replicates == 2 for c in result.cells)

    def test_temptation_sweep_needs_one_loner_value(self, tiny_run):
        spec = SweepSpec(base=tiny_run, t_values=(1.2,), l_values=(0.3, 0.5), replicates=1)
        with pytest.raises(ConfigError):
            sweep_temptation(spec, workers=1)

    def test_seeds_shared_across_schemes(self, tiny_sweep):
        spec = tiny_sweep.model_copy(update={"schemes": (InitScheme.model_validate("pd"), InitScheme.model_validate("opd"))})
        result = sweep(spec, workers=1)
        pd_cell = result.cell("pd", UpdateRule.SYNCHRONOUS, 1, 0)
        opd_cell = result.cell("opd", UpdateRule.SYNCHRONOUS, 1, 0)
        assert pd_cell.seeds == opd_cell.seeds == (derive_seed(9, 1, 0, 0), derive_seed(9, 1, 0, 1))

    def test_pd_cells_never_abstain(self, tiny_sweep):
        spec = tiny_sweep.model_copy(update={"schemes": (InitScheme.model_validate("pd"),)})
        assert all(c.mean_alpha == 0.0 for c in sweep(spec, workers=1).cells)

    def test_tl_plane_order(self, tiny_run):
        base = tiny_run.model_copy(update={"game": GameParams(mode=GameMode.SWEEP)})
        spec = SweepSpec(
            base=base, t_values=(1.0, 1.5, 2.0), l_values=(0.0, 0.5), replicates=1,
            rules=(UpdateRule.SYNCHRONOUS, UpdateRule.ASYNCHRONOUS),
        )
        result = sweep_tl(spec, workers=2)
        assert len(result.cells) == 2 * 3 * 2
        sync_cells = [c for c in result.cells if c.rule == UpdateRule.SYNCHRONOUS]
        assert [(c.L, c.T) for c in sync_cells] == [(L, T) for L in (0.0, 0.5) for T in (1.0, 1.5, 2.0)]
        eps, _ = result.matrices("pdpa", UpdateRule.ASYNCHRONOUS)
        assert eps.shape == (2, 3) and not np.isnan(eps).any()

    def test_progress_counts_cells(self, tiny_sweep):
        ticks = []
        sweep(tiny_sweep, workers=1, on_cell_done=lambda done, total: ticks.append((done, total)))
        assert ticks == [(1, 2), (2, 2)]


class TestTimecourse:

    def test_shape_and_seeds(self, tiny_run):
        course = timecourse(tiny_run, 3, master_seed=2, workers=1)
        assert list(course.steps) == [0, 1, 2, 3, 4]
        assert course.raw_epsilon.shape == (3, 5)
        assert np.allclose(course.mean_epsilon, course.raw_epsilon.mean(axis=0))
        assert course.seeds == tuple(derive_seed(2, 0, 0, rep) for rep in range(3))

    def test_single_replicate(self, tiny_run):
        course = timecourse(tiny_run, 1, master_seed=2, workers=1)
        assert np.all(course.se_alpha == 0.0)
