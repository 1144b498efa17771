"""Unit tests for the run configuration reader."""

import pytest

from chgsim.core.exceptions import ConfigError
from chgsim.models import CoefficientMode, PotentialKind
from chgsim.services.config_parser import format_config, parse_config, parse_value, set_path

VORTEX_CONFIG = """
# drift-dominated run
[grid]
dimension = 2
extents = 1.0, 2.0
cells = 8, 16

[coefficients]
beta = 0.5
a = vortex(omega=0.2)
c = vortex(omega=0.1)
b = 1.5
mode = quasilinear

[potential]
kind = quartic_general
alpha = 2.0

[time]
tau = 0.001
steps = 10
picard = true

[initial]
psi0 = noise(mean=0.1, amplitude=0.01)
"""


def _errors(exc_info):
    return exc_info.value.details["errors"]


class TestParseValue:
    """Test right-hand-side parsing."""

    def test_scalars(self):
        assert parse_value("true") is True
        assert parse_value("12") == 12
        assert parse_value("-1.5e-3") == pytest.approx(-1.5e-3)
        assert parse_value("double_well") == "double_well"

    def test_list(self):
        assert parse_value("1.0, 2, 3.5") == [1.0, 2, 3.5]

    def test_builtin(self):
        assert parse_value("constant(values=[0.1, -0.2])") == {
            "name": "constant",
            "params": {"values": [0.1, -0.2]},
        }

    def test_builtin_without_params(self):
        assert parse_value("zero()") == {"name": "zero", "params": {}}

    def test_builtin_bad_param(self):
        with pytest.raises(ValueError):
            parse_value("vortex(0.2)")


class TestParseConfig:
    """Test whole-file parsing and validation."""

    def test_full_config(self):
        config = parse_config(VORTEX_CONFIG, required=("grid", "time"))

        assert config.grid.cells == [8, 16]
        assert config.coefficients.beta == 0.5
        assert config.coefficients.a.name == "vortex"
        assert config.coefficients.a.params == {"omega": 0.2}
        assert config.coefficients.b.name == "constant"
        assert config.coefficients.b.params == {"value": 1.5}
        assert config.coefficients.mode == CoefficientMode.QUASILINEAR
        assert config.potential.kind == PotentialKind.QUARTIC_GENERAL
        assert config.time.picard is True
        assert config.initial.psi0.params["mean"] == 0.1

    def test_defaults(self, simulate_config_text):
        config = parse_config(simulate_config_text)

        assert config.grid.extents == [1.0]
        assert config.data.f.name == "zero"
        assert config.output.snapshot_every == 0
        assert config.symbol is None

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[mesh]\ncells = 4\n")

        assert _errors(exc)[0]["line"] == 1
        assert "unknown section" in _errors(exc)[0]["message"]

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[time]\ntau = 0.1\nsteps = 2\ndt = 0.1\n")

        assert _errors(exc)[0]["key"] == "time.dt"
        assert _errors(exc)[0]["line"] == 4

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[time]\ntau = 0.1\ntau = 0.2\nsteps = 1\n")

        assert _errors(exc)[0]["message"] == "duplicate key"

    def test_unknown_builtin_names_registry(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[coefficients]\na = whirlpool(omega=1)\n")

        message = _errors(exc)[0]["message"]
        assert "whirlpool" in message
        assert "vortex" in message

    def test_missing_required_section(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[grid]\ndimension = 1\nextents = 1\ncells = 8\n", required=("grid", "time"))

        assert _errors(exc)[0]["key"] == "time"

    def test_value_errors_carry_line(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[time]\ntau = -0.1\nsteps = 2\n")

        error = _errors(exc)[0]
        assert error["line"] == 2
        assert "positive" in error["message"]

    def test_every_error_reported(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[mesh]\n[time]\ndt = 1\nnot a pair\n")

        assert len(_errors(exc)) == 3

    def test_exit_code(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[mesh]\n")

        assert exc.value.exit_code == 4


class TestFormatConfig:
    """Test printing a configuration back."""

    def test_reparses_to_same_config(self):
        config = parse_config(VORTEX_CONFIG)

        assert parse_config(format_config(config)) == config

    def test_builtin_text(self):
        text = format_config(parse_config(VORTEX_CONFIG))

        assert "a = vortex(omega=0.20000000000000001)" in text
        assert "[grid]" in text


class TestSetPath:
    """Test sweep parameter paths."""

    def test_section_key(self):
        config = set_path(parse_config(VORTEX_CONFIG), "coefficients.beta", 2.0)

        assert config.coefficients.beta == 2.0

    def test_builtin_param(self):
        config = set_path(parse_config(VORTEX_CONFIG), "coefficients.a.omega", 0.4)

        assert config.coefficients.a.params["omega"] == 0.4
        assert config.coefficients.c.params["omega"] == 0.1

    def test_omega_sets_both_fields(self):
        config = set_path(parse_config(VORTEX_CONFIG), "coefficients.omega", 0.3)

        assert config.coefficients.a.params["omega"] == 0.3
        assert config.coefficients.c.params["omega"] == 0.3

    def test_original_untouched(self):
        original = parse_config(VORTEX_CONFIG)

        set_path(original, "time.tau", 0.5)

        assert original.time.tau == 0.001

    @pytest.mark.parametrize("path", ["beta", "mesh.cells", "coefficients.gamma", "time.tau.x", "a.b.c.d"])
    def test_bad_paths(self, path):
        with pytest.raises(ConfigError):
            set_path(parse_config(VORTEX_CONFIG), path, 1.0)

    def test_rejected_value(self):
        with pytest.raises(ConfigError):
            set_path(parse_config(VORTEX_CONFIG), "time.tau", -1.0)

    def test_omega_without_vortex(self, simulate_config_text):
        with pytest.raises(ConfigError):
            set_path(parse_config(simulate_config_text), "coefficients.omega", 0.3)
