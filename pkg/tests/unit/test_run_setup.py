"""Unit tests for resolving a configuration into a run."""

import numpy as np
import pytest

from chgsim.core.exceptions import ConfigError, ValidationError
from chgsim.services.config_parser import parse_config, set_path
from chgsim.services.grid import integrate
from chgsim.services.run_setup import build_run, make_simulation


class TestBuildRun:
    """Test build_run."""

    def test_resolves_everything(self, simulate_config_text):
        setup = build_run(parse_config(simulate_config_text))

        assert setup.grid.cells == (16,)
        assert setup.data.homogeneous
        assert setup.growth.passed
        assert setup.manufactured is None
        assert setup.mean_shift == 0.0

    def test_manufactured_initial(self, simulate_config_text):
        text = simulate_config_text.replace(
            "psi0 = cosine(mean=0.0, amplitude=0.2, mode=1)",
            "psi0 = manufactured\n\n[data]\nf = manufactured\ng = manufactured",
        )

        setup = build_run(parse_config(text))

        assert setup.manufactured is not None
        assert not setup.data.homogeneous
        np.testing.assert_allclose(setup.psi0.values, np.cos(np.pi * setup.grid.cell_centers()[0]))

    def test_shift_mean(self, simulate_config_text):
        config = set_path(parse_config(simulate_config_text), "initial.psi0.mean", 0.3)
        config = set_path(config, "initial.shift_mean", True)

        setup = build_run(config)

        assert setup.mean_shift == pytest.approx(0.3)
        assert integrate(setup.psi0) == pytest.approx(0.0, abs=1e-14)

    def test_incompatible_initial_data(self, simulate_config_text):
        text = simulate_config_text.replace(
            "psi0 = cosine(mean=0.0, amplitude=0.2, mode=1)",
            "psi0 = tanh_profile(width=0.2)",
        )

        with pytest.raises(ValidationError):
            build_run(parse_config(text))

    def test_missing_grid(self):
        with pytest.raises(ConfigError):
            build_run(parse_config("[time]\ntau = 0.1\nsteps = 1\n"))


class TestMakeSimulation:
    """Test make_simulation."""

    def test_missing_time(self):
        setup = build_run(parse_config("[grid]\ndimension = 1\nextents = 1\ncells = 8\n"))

        with pytest.raises(ConfigError):
            make_simulation(setup)

    def test_runs(self, simulate_config_text):
        setup = build_run(parse_config(simulate_config_text))

        result = make_simulation(setup).run(setup.psi0)

        assert result.state.step == 5
