"""Unit tests for equilibrium detection."""

from types import SimpleNamespace

import numpy as np
import pytest

from chgsim.models import DiagnosticsRecord
from chgsim.services.grid import CellField
from chgsim.services.steady import SteadyDetector, decay_exponent, detect_steady


def _record(step, rate=1e-10, max_update=1e-6, stationary=1e-8, energy=0.0):
    return DiagnosticsRecord(
        step=step,
        t=0.1 * step,
        mass=0.0,
        energy=energy,
        mean_mu=0.0,
        mean_mu_residual=0.0,
        stationary_residual=stationary,
        rate_psi=rate,
        rate_mu=rate,
        max_update=max_update,
    )


def _state(grid, step, value=0.0):
    psi = CellField(grid, np.full(grid.shape, value))
    return SimpleNamespace(psi=psi, mu=CellField(grid, np.zeros(grid.shape)), grid=grid, step=step, t=0.1 * step)


class TestSteadyDetector:
    """Test the windowed detector."""

    def test_fires_after_window(self, grid_1d):
        detector = SteadyDetector(window=3)
        state = _state(grid_1d, 1)

        fired = [detector.update(state, _record(k)) for k in range(1, 4)]

        assert fired == [False, False, True]

    def test_fast_step_resets_count(self, grid_1d):
        detector = SteadyDetector(window=2)
        state = _state(grid_1d, 1)

        detector.update(state, _record(1))
        assert not detector.update(state, _record(2, rate=1.0))
        assert detector.count == 0
        assert not detector.update(state, _record(3))

    def test_fixed_point_fires_at_once(self, grid_1d):
        detector = SteadyDetector(window=50)

        assert detector.update(_state(grid_1d, 1), _record(1, max_update=0.0))

    def test_fixed_point_needs_stationary_state(self, grid_1d):
        detector = SteadyDetector(window=50, tol_station=1e-6)

        assert not detector.update(_state(grid_1d, 1), _record(1, max_update=0.0, stationary=1e-3))

    def test_reset(self, grid_1d):
        detector = SteadyDetector(window=5)
        detector.update(_state(grid_1d, 1), _record(1))

        detector.reset()

        assert detector.count == 0


class TestDecayExponent:
    """Test the exponential fit of the energy gap."""

    def test_recovers_rate(self):
        times = [0.5 * k for k in range(10)]
        energies = [1.0 + np.exp(-2.0 * t) for t in times[:-1]] + [1.0]

        assert decay_exponent(times, energies) == pytest.approx(2.0, rel=1e-9)

    def test_too_few_points(self):
        assert decay_exponent([0.0, 1.0, 2.0], [3.0, 2.0, 1.0]) is None

    def test_flat_energy(self):
        assert decay_exponent(list(range(8)), [1.0] * 8) is None


class TestDetectSteady:
    """Test scanning a trajectory tail."""

    def test_reports_first_detection(self, grid_1d):
        tail = [(_state(grid_1d, k, value=0.2), _record(k, energy=1.0)) for k in range(1, 6)]

        report = detect_steady(tail, window=3)

        assert report.detected
        assert report.step == 3
        assert report.mean_psi == pytest.approx(0.2)
        assert report.mu_inf == pytest.approx(0.0)
        assert len(report.psi) == grid_1d.n_cells

    def test_none_when_moving(self, grid_1d):
        tail = [(_state(grid_1d, k), _record(k, rate=1e-3)) for k in range(1, 6)]

        assert detect_steady(tail, window=3) is None
