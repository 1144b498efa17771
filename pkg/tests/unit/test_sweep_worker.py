"""Unit tests for the sweep worker."""

import pytest

from chgsim.models import RunStatus, SweepRow
from chgsim.services.config_parser import parse_config
from chgsim.workers.sweep_worker import SWEEP_COLUMNS, SweepWorker, run_single, sweep_table


@pytest.fixture
def config(simulate_config_text):
    return parse_config(simulate_config_text, required=("grid", "time"))


class TestRunSingle:
    """Test one sweep entry."""

    def test_ok_row(self, config):
        row = run_single(config, "coefficients.beta", 2.0)

        assert row.status == RunStatus.OK
        assert row.steps == 5
        assert row.t == pytest.approx(0.05)
        assert row.mass_balance_residual < 1e-12

    def test_rejected_value_becomes_failed_row(self, config):
        row = run_single(config, "time.tau", -1.0)

        assert row.status == RunStatus.FAILED
        assert row.error_code == "CONFIG_ERROR"
        assert row.steps == 0

    def test_hypothesis_violation_becomes_failed_row(self, config):
        row = run_single(config, "coefficients.b.value", -1.0)

        assert row.status == RunStatus.FAILED
        assert row.error_code == "HYPOTHESIS_H_VIOLATED"


class TestSweepWorker:
    """Test the concurrent sweep."""

    async def test_rows_sorted_by_value(self, config):
        worker = SweepWorker(max_workers=2, use_processes=False)

        stats = await worker.run(config, "coefficients.beta", [2.0, 0.5, -1.0])

        assert [row.value for row in stats["rows"]] == [-1.0, 0.5, 2.0]
        assert stats["runs"] == 3
        assert stats["failed"] == 1
        assert stats["sweep_number"] == 1
        assert stats["rows"][0].error_code == "CONFIG_ERROR"

    def test_default_workers_from_settings(self):
        assert SweepWorker().max_workers >= 1


class TestSweepTable:
    """Test the CSV rows."""

    def test_column_order(self):
        row = SweepRow(value=0.5, status=RunStatus.FAILED, error_code="SOLVER_ERROR")

        table = sweep_table([row])

        assert len(table[0]) == len(SWEEP_COLUMNS)
        assert table[0][:3] == [0.5, "failed", "SOLVER_ERROR"]
