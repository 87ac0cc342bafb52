"""
Tests for the bundle writers.
"""

import numpy as np
import pytest

from pdpa.core.errors import OutputError
from pdpa.core.rng import RngStream
from pdpa.models.dto import AggregateCell, AggregateResult, InitScheme, LatticeConfig
from pdpa.models.enums import UpdateRule
from pdpa.services.metrics import population_stats, snapshot
from pdpa.services.population import initialize
from pdpa.utils.csv_io import (
    MANIFEST_NAME,
    file_sha256,
    heatmap_name,
    write_heatmap,
    write_manifest,
    write_replicates,
    write_snapshot,
    write_sweep_table,
    write_timeseries,
)
from pdpa.utils.formatting import format_frequency, format_param, format_real
from tests.helpers import read_grid, read_manifest, read_timeseries


def _result(t_values=(1.0, 1.5), l_values=(0.0, 0.5)):
    cells = []
    for li, L in enumerate(l_values):
        for ti, T in enumerate(t_values):
            cells.append(AggregateCell(
                scheme="pdpa", rule=UpdateRule.SYNCHRONOUS, T=T, L=L, t_index=ti, l_index=li,
                replicates=2, mean_epsilon=0.25 * ti, se_epsilon=0.01, mean_alpha=0.1 * li, se_alpha=0.0,
                seeds=(11, 12), raw_epsilon=(0.25 * ti, 0.25 * ti), raw_alpha=(0.1 * li, 0.1 * li),
            ))
    # shuffled on purpose; writers must sort
    return AggregateResult(t_values=t_values, l_values=l_values, cells=tuple(reversed(cells)))


class TestNumberFormats:

    def test_formats(self):
        assert format_real(0.5) == "0.500000000"
        assert format_frequency(0.0) == "0"
        assert format_frequency(0.25) == "0.250000000"
        assert format_param(1.05) == "1.05"
        assert format_param(2.0) == "2"


class TestTimeseries:
    """Time series CSV."""

    def test_all_cooperator_row(self, all_cooperators, tmp_path):
        path = write_timeseries([population_stats(all_cooperators, 0)], tmp_path / "ts.csv")
        lines = path.read_bytes().decode("utf-8").split("\n")
        assert lines[0] == (
            "step,mean_epsilon,mean_alpha,frac_cooperate,frac_defect,"
            + ",".join(f"alpha_hist_{i}" for i in range(9))
        )
        assert lines[1] == "0,1.000000000,0.000000000,1.000000000,0.000000000,1.000000000,0,0,0,0,0,0,0,0"
        assert len(lines[1].split(",")) == 14
        assert b"\r" not in path.read_bytes()

    def test_read_back(self, tmp_path):
        lattice = initialize(InitScheme(), LatticeConfig(width=9, height=9), RngStream(6))
        series = [population_stats(lattice, 0), population_stats(lattice, 5)]
        rows = read_timeseries(write_timeseries(series, tmp_path / "ts.csv"))
        assert [r["step"] for r in rows] == [0, 5]
        assert rows[1]["mean_alpha"] == pytest.approx(series[1].mean_alpha, abs=1e-9)

    def test_empty_series_rejected(self, tmp_path):
        with pytest.raises(OutputError):
            write_timeseries([], tmp_path / "ts.csv")

    def test_unwritable_path(self, tmp_path, all_cooperators):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OutputError) as info:
            write_timeseries([population_stats(all_cooperators, 0)], blocker / "ts.csv")
        assert info.value.exit_code == 2


class TestAggregates:
    """Sweep tables and heat maps."""

    def test_heatmap_sorted_by_l_then_t(self, tmp_path):
        result = _result()
        path = write_heatmap(result, "pdpa", UpdateRule.SYNCHRONOUS, tmp_path / heatmap_name("pdpa", UpdateRule.SYNCHRONOUS))
        assert path.name == "heatmap_pdpa_sync.csv"
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "T,L,mean_epsilon,se_epsilon,mean_alpha,se_alpha"
        assert [tuple(line.split(",")[:2]) for line in lines[1:]] == [("1", "0"), ("1.5", "0"), ("1", "0.5"), ("1.5", "0.5")]

    def test_heatmap_missing_cells(self, tmp_path):
        result = _result()
        partial = AggregateResult(t_values=result.t_values, l_values=result.l_values, cells=result.cells[:2])
        with pytest.raises(OutputError):
            write_heatmap(partial, "pdpa", UpdateRule.SYNCHRONOUS, tmp_path / "h.csv")

    def test_heatmap_name_for_custom_scheme(self):
        assert heatmap_name("custom:0.5,0.5", UpdateRule.ASYNCHRONOUS) == "heatmap_custom-0.5_0.5_async.csv"

    def test_sweep_table(self, tmp_path):
        lines = write_sweep_table(_result(), tmp_path / "sweep_t.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "scheme,rule,T,L,mean_epsilon,se_epsilon,mean_alpha,se_alpha"
        assert len(lines) == 5

    def test_replicates_table(self, tmp_path):
        lines = write_replicates(_result(), tmp_path / "replicates.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "scheme,rule,T,L,replicate,seed,epsilon,alpha"
        assert len(lines) == 1 + 4 * 2
        assert lines[1].split(",")[4:6] == ["0", "11"]


class TestSnapshots:

    def test_grids(self, tmp_path):
        lattice = initialize(InitScheme(), LatticeConfig(width=7, height=4), RngStream(3))
        paths = write_snapshot(snapshot(lattice, 10), tmp_path / "snapshot_10")
        assert [p.name for p in paths] == [
            "snapshot_10.epsilon.csv", "snapshot_10.alpha.csv", "snapshot_10.strategy.csv",
        ]
        eps, alpha, strategy = (read_grid(p) for p in paths)
        assert eps.shape == alpha.shape == strategy.shape == (4, 7)
        assert np.allclose(eps, (1 - strategy) * (1 - alpha), atol=1e-9)
        assert np.array_equal(strategy, lattice.strategy)


class TestManifest:

    def test_checksums_and_no_timestamps(self, tmp_path):
        data = tmp_path / "a.csv"
        data.write_text("x\n1\n", encoding="utf-8")
        path = write_manifest(tmp_path, "run", {"seed": 1}, [1], [data], options={"replicates": 1})
        assert path.name == MANIFEST_NAME
        manifest = read_manifest(path)
        assert manifest["files"] == {"a.csv": file_sha256(data)}
        assert manifest["command"] == "run"
        assert manifest["options"] == {"replicates": 1}
        assert "--config manifest.yaml" in manifest["reproduce"]

    def test_deterministic(self, tmp_path):
        data = tmp_path / "a.csv"
        data.write_text("x\n", encoding="utf-8")
        first = write_manifest(tmp_path, "run", {"seed": 1}, [1], [data]).read_bytes()
        second = write_manifest(tmp_path, "run", {"seed": 1}, [1], [data]).read_bytes()
        assert first == second
