"""Tests for rounds/outputs.py and rounds/records.py"""

import json

import numpy as np
import pytest
import yaml

from dpu_sim.rounds.config import Method
from dpu_sim.rounds.outputs import (
    OutputExistsError,
    cell_csv_path,
    prepare_output_dir,
    read_round_csv,
    summarize,
    write_round_csv,
    write_summary,
)
from dpu_sim.rounds.records import CSV_FIELDS, RoundLog


def make_log(round_index: int, method: str = "dpu", seed: int = 1, **fields) -> RoundLog:
    values = dict(
        round=round_index,
        method=method,
        seed=seed,
        train_loss=0.5,
        val_acc=0.8,
        test_acc=0.75,
        bytes_sent=100,
        reinit=False,
        skipped=False,
        mask_count=10,
        new_samples=0 if round_index == 1 else 200,
        train_size=200 * round_index,
    )
    values.update(fields)
    return RoundLog(**values)


class TestRoundLog:
    """Tests for RoundLog."""

    def test_csv_row(self):
        """Booleans and integers print as integers, floats round-trip."""
        row = make_log(2, train_loss=np.float64(0.1), reinit=True).csv_row()
        assert row == ["2", "0.1", "0.8", "0.75", "100", "1", "0", "10", "200"]
        assert len(row) == len(CSV_FIELDS)

    def test_wall_time_ignored_in_equality(self):
        """Wall time does not affect equality."""
        assert make_log(1, wall_time=1.0) == make_log(1, wall_time=2.0)


class TestRoundCsv:
    """Tests for write_round_csv() and read_round_csv()."""

    def test_write_and_read(self, tmp_path):
        """Rows come back with every column as float."""
        path = write_round_csv(tmp_path, Method.GCPU, 4, [make_log(1), make_log(2)])
        assert path == cell_csv_path(tmp_path, Method.GCPU, 4)
        assert path == tmp_path / "gcpu" / "seed-4.csv"
        assert path.read_text().splitlines()[0] == ",".join(CSV_FIELDS)
        rows = read_round_csv(path)
        assert rows[1]["new_samples"] == 200.0
        assert rows[0]["test_acc"] == 0.75


class TestPrepareOutputDir:
    """Tests for prepare_output_dir()."""

    def test_writes_config_snapshot(self, tmp_path, small_config):
        """The snapshot is valid YAML in the config layout."""
        prepare_output_dir(tmp_path / "out", small_config())
        snapshot = yaml.safe_load((tmp_path / "out" / "config.yaml").read_text())
        assert snapshot["version"] == 1
        assert snapshot["model"]["layers"] == [2, 8, 3]
        assert snapshot["update"]["reinit"] == {"dpu": "doubling", "gcpu": "never"}

    def test_existing_empty_dir_is_fine(self, tmp_path, small_config):
        """An empty directory may be reused."""
        prepare_output_dir(tmp_path, small_config())
        assert (tmp_path / "config.yaml").exists()

    def test_refuses_non_empty(self, tmp_path, small_config):
        """A directory with files needs force."""
        (tmp_path / "x").write_text("")
        with pytest.raises(OutputExistsError, match="--force"):
            prepare_output_dir(tmp_path, small_config())
        prepare_output_dir(tmp_path, small_config(), force=True)


class TestSummarize:
    """Tests for summarize() and write_summary()."""

    @pytest.fixture
    def results(self):
        return {
            (Method.DPU, 1): [
                make_log(1, test_acc=0.7, bytes_sent=10),
                make_log(2, test_acc=0.8, bytes_sent=30),
            ],
            (Method.DPU, 2): [
                make_log(1, seed=2, test_acc=0.9, bytes_sent=10, skipped=True),
                make_log(2, seed=2, test_acc=0.6, bytes_sent=10),
            ],
            (Method.FU, 1): [make_log(r, "fu", bytes_sent=100) for r in (1, 2)],
            (Method.FU, 2): [make_log(r, "fu", 2, bytes_sent=100) for r in (1, 2)],
        }

    def test_per_round_mean_and_population_std(self, results):
        """Per-round statistics use the population standard deviation."""
        dpu = summarize(results)["dpu"]
        first = dpu["per_round"][0]
        assert first["test_acc"]["mean"] == pytest.approx(0.8)
        assert first["test_acc"]["std"] == pytest.approx(0.1)
        assert first["skipped"] == 1
        assert dpu["seeds"] == [1, 2]

    def test_final_and_cumulative(self, results):
        """Final accuracy and cumulative bytes aggregate over seeds."""
        dpu = summarize(results)["dpu"]
        assert dpu["final_test_acc"]["mean"] == pytest.approx(0.7)
        assert dpu["cumulative_bytes"]["mean"] == pytest.approx(30)

    def test_ratio_to_full_updating(self, results):
        """Partial methods get their byte ratio to FU; FU does not."""
        summary = summarize(results)
        assert summary["dpu"]["ratio_to_fu"]["mean"] == pytest.approx((0.2 + 0.1) / 2)
        assert "ratio_to_fu" not in summary["fu"]

    def test_write_summary(self, results, tmp_path):
        """The JSON file wraps the summary under "methods"."""
        path = write_summary(tmp_path, results)
        data = json.loads(path.read_text())
        assert set(data["methods"]) == {"dpu", "fu"}
