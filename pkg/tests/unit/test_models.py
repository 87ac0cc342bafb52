"""
Tests for the configuration DTOs, lattice value types and error hierarchy.
"""

from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from pdpa.core.errors import (
    AlphaRangeError,
    ConfigError,
    OutputError,
    ParameterError,
    SelftestFailure,
    SimulationError,
)
from pdpa.models.dto import (
    AggregateCell,
    AggregateResult,
    GameParams,
    InitScheme,
    LatticeConfig,
    RunConfig,
    SamplingSpec,
    SweepSpec,
)
from pdpa.models.enums import GameMode, InitSchemeKind, SamplingMode, Strategy, UpdateRule
from pdpa.models.lattice import (
    AgentState,
    AlphaLevel,
    Lattice,
    alpha_value,
    effective_cooperation,
    neighbor_sites,
    neighbor_table,
)


class TestAlpha:
    """Abstention levels and effective cooperation."""

    def test_alpha_value_is_exact(self):
        assert alpha_value(0) == 0
        assert alpha_value(3) == Fraction(3, 8)
        assert alpha_value(8) == 1

    @pytest.mark.parametrize("level", [-1, 9])
    def test_alpha_value_rejects_out_of_range(self, level):
        with pytest.raises(AlphaRangeError):
            alpha_value(level)

    def test_alpha_range_error_is_value_error(self):
        with pytest.raises(ValueError):
            AlphaLevel(12)

    def test_alpha_level_float(self):
        assert float(AlphaLevel(2)) == 0.25
        assert AlphaLevel(2).max_level == 8

    def test_effective_cooperation(self):
        assert effective_cooperation(AgentState.of(Strategy.COOPERATE, 0)) == 1.0
        assert effective_cooperation(AgentState.of(Strategy.COOPERATE, 2)) == 0.75
        assert effective_cooperation(AgentState.of(Strategy.DEFECT, 0)) == 0.0
        assert effective_cooperation(AgentState.of(Strategy.COOPERATE, 8)) == 0.0


class TestNeighbors:
    """Periodic von Neumann neighborhood."""

    def test_order_up_down_left_right(self):
        config = LatticeConfig(width=5, height=4)
        assert neighbor_sites(config, (1, 2)) == ((0, 2), (2, 2), (1, 1), (1, 3))

    def test_wraps_at_corner(self):
        config = LatticeConfig(width=5, height=4)
        assert neighbor_sites(config, (0, 0)) == ((3, 0), (1, 0), (0, 4), (0, 1))

    def test_outside_site_rejected(self):
        with pytest.raises(ValueError):
            neighbor_sites(LatticeConfig(width=3, height=3), (3, 0))

    def test_table_matches_sites(self):
        config = LatticeConfig(width=4, height=3)
        table = neighbor_table(config)
        for flat in range(config.size):
            site = divmod(flat, config.width)
            expected = [r * config.width + c for r, c in neighbor_sites(config, site)]
            assert list(table[flat]) == expected

    def test_lattice_too_small(self):
        with pytest.raises(ValidationError):
            LatticeConfig(width=2, height=5)


class TestLattice:
    """Lattice storage."""

    def test_from_states_round_trip(self):
        config = LatticeConfig(width=3, height=3)
        states = [AgentState.of(i % 2, i % 9) for i in range(9)]
        lattice = Lattice.from_states(config, states)
        assert list(lattice.states()) == states
        assert lattice.state_at((1, 1)) == states[4]

    def test_copy_is_independent(self, all_cooperators):
        clone = all_cooperators.copy()
        clone.set_state((0, 0), AgentState.of(Strategy.DEFECT, 4))
        assert clone != all_cooperators
        assert all_cooperators.state_at((0, 0)) == AgentState.of(Strategy.COOPERATE, 0)

    def test_invalid_level_rejected(self):
        config = LatticeConfig(width=3, height=3)
        with pytest.raises(AlphaRangeError):
            Lattice(config, np.zeros((3, 3), dtype=np.int8), np.full((3, 3), 9, dtype=np.int16))

    def test_epsilon_grid(self):
        config = LatticeConfig(width=3, height=3)
        lattice = Lattice.uniform(config, AgentState.of(Strategy.COOPERATE, 2))
        assert np.all(lattice.epsilon_grid() == 0.75)
        assert np.all(lattice.alpha_grid() == 0.25)


class TestGameParams:
    """Payoff validation by game mode."""

    def test_defaults(self):
        params = GameParams()
        assert params.payoffs == (1.0, 0.0, 1.4, 0.0, 0.4)
        assert params.K == 0.1 and params.kappa == 4

    def test_strict_rejects_out_of_range_temptation(self):
        with pytest.raises(ValidationError, match="1 < T < 2"):
            GameParams(T=2.5)

    @pytest.mark.parametrize("T", [1.0, 2.0])
    def test_strict_rejects_endpoints(self, T):
        with pytest.raises(ValidationError):
            GameParams(T=T)

    def test_sweep_mode_admits_endpoints(self, caplog):
        params = GameParams(mode=GameMode.SWEEP, T=2.0, L=0.0)
        assert params.T == 2.0 and params.L == 0.0
        assert "boundary" in caplog.text

    def test_sweep_mode_still_bounded(self):
        with pytest.raises(ValidationError, match="1 <= T <= 2"):
            GameParams(mode=GameMode.SWEEP, T=2.1)

    def test_fixed_payoffs(self):
        with pytest.raises(ValidationError):
            GameParams(R=2.0)
        with pytest.raises(ValidationError):
            GameParams(S=-0.1)

    def test_noise_must_be_positive(self):
        with pytest.raises(ValidationError):
            GameParams(K=0.0)

    def test_with_axes_validates(self):
        assert GameParams().with_axes(1.9, 0.7).T == 1.9
        with pytest.raises(ValidationError):
            GameParams().with_axes(1.9, 1.0)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            GameParams.model_validate({"Temptation": 1.2})


class TestInitScheme:
    """Scheme parsing."""

    @pytest.mark.parametrize("text,kind", [("pd", InitSchemeKind.PD), ("OPD", InitSchemeKind.OPD), (" pdpa ", InitSchemeKind.PDPA)])
    def test_named_schemes(self, text, kind):
        assert InitScheme.model_validate(text).kind == kind

    def test_custom_weights(self):
        scheme = InitScheme.model_validate("custom:0.5,0,0,0,0,0,0,0,0.5")
        assert scheme.kind == InitSchemeKind.CUSTOM
        assert scheme.weights == (0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5)
        assert InitScheme.model_validate(str(scheme)) == scheme

    def test_custom_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            InitScheme.model_validate("custom:0.5,0.4")

    def test_negative_weight_rejected(self):
        with pytest.raises(ValidationError):
            InitScheme.model_validate("custom:1.5,-0.5")

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValidationError):
            InitScheme.model_validate("mixed")

    def test_run_config_needs_one_weight_per_level(self):
        with pytest.raises(ValidationError, match="9 weights"):
            RunConfig(scheme=InitScheme.model_validate("custom:0.5,0.5"))


class TestSamplingSpec:

    def test_every_k(self):
        spec = SamplingSpec.model_validate("every-k:25")
        assert spec.mode == SamplingMode.EVERY_K and spec.k == 25
        assert str(spec) == "every-k:25"

    def test_every_k_needs_period(self):
        with pytest.raises(ValidationError):
            SamplingSpec.model_validate("every-k")

    def test_all(self):
        assert SamplingSpec.model_validate("all").mode == SamplingMode.ALL


class TestRunConfig:
    """Run configuration defaults and validation."""

    def test_defaults(self):
        config = RunConfig()
        assert (config.lattice.width, config.lattice.height) == (102, 102)
        assert config.step_count == 100_000
        assert config.rule == UpdateRule.SYNCHRONOUS
        assert config.scheme.kind == InitSchemeKind.PDPA
        assert config.seed == 1

    def test_snapshot_steps_sorted_and_unique(self):
        config = RunConfig(step_count=100, snapshot_steps=(50, 10, 50))
        assert config.snapshot_steps == (10, 50)

    def test_snapshot_step_beyond_run_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(step_count=10, snapshot_steps=(11,))

    def test_seed_is_64_bit(self):
        RunConfig(seed=(1 << 64) - 1)
        with pytest.raises(ValidationError):
            RunConfig(seed=1 << 64)

    def test_digest_is_stable(self):
        assert RunConfig().digest() == RunConfig().digest()
        assert RunConfig(seed=2).digest() != RunConfig().digest()


class TestSweepSpec:
    """Sweep grid validation."""

    def test_values_strictly_increasing(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            SweepSpec(t_values=(1.4, 1.2))

    def test_values_non_empty(self):
        with pytest.raises(ValidationError):
            SweepSpec(l_values=())

    def test_values_checked_against_mode(self):
        with pytest.raises(ValidationError):
            SweepSpec(t_values=(1.0, 1.5))
        sweep_base = RunConfig(game=GameParams(mode=GameMode.SWEEP))
        assert SweepSpec(base=sweep_base, t_values=(1.0, 1.5)).t_values == (1.0, 1.5)

    def test_resolved_defaults_to_base(self):
        spec = SweepSpec()
        assert spec.resolved_schemes == (spec.base.scheme,)
        assert spec.resolved_rules == (UpdateRule.SYNCHRONOUS,)

    def test_cell_config(self):
        spec = SweepSpec()
        cell = spec.cell_config(InitScheme(kind=InitSchemeKind.OPD), UpdateRule.ASYNCHRONOUS, 1.9, 0.4, 99)
        assert cell.game.T == 1.9 and cell.seed == 99 and cell.rule == UpdateRule.ASYNCHRONOUS


class TestAggregateResult:

    def _cell(self, t_index, l_index, eps):
        return AggregateCell(
            scheme="pdpa", rule=UpdateRule.SYNCHRONOUS, T=1.1 + t_index, L=0.2 + l_index,
            t_index=t_index, l_index=l_index, replicates=1,
            mean_epsilon=eps, se_epsilon=0.0, mean_alpha=0.1, se_alpha=0.0,
            seeds=(1,), raw_epsilon=(eps,), raw_alpha=(0.1,),
        )

    def test_matrices_are_l_by_t(self):
        cells = tuple(self._cell(t, l, 10 * l + t) for l in range(2) for t in range(3))
        result = AggregateResult(t_values=(1.1, 1.2, 1.3), l_values=(0.2, 0.3), cells=cells)
        eps, alpha = result.matrices("pdpa", UpdateRule.SYNCHRONOUS)
        assert eps.shape == (2, 3)
        assert eps[1, 2] == 12
        assert np.all(alpha == 0.1)
        assert result.groups() == [("pdpa", UpdateRule.SYNCHRONOUS)]
        assert result.cell("pdpa", UpdateRule.SYNCHRONOUS, 1, 0).mean_epsilon == 1


class TestErrors:
    """Exit codes carried by the error hierarchy."""

    def test_exit_codes(self):
        assert ConfigError("x").exit_code == 1
        assert ParameterError("x").exit_code == 1
        assert SimulationError("x").exit_code == 2
        assert OutputError("x", path="p").exit_code == 2
        assert SelftestFailure("x").exit_code == 3

    def test_messages_carry_context(self):
        assert str(ConfigError("bad", key="game.T")) == "game.T: bad"
        assert "seed=42" in str(SimulationError("boom", seed=42))
        assert "[out/file.csv]" in str(OutputError("cannot write", path="out/file.csv"))
