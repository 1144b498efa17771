"""Unit tests for coefficient fields, registries and validators."""

import numpy as np
import pytest

from chgsim.core.exceptions import ConfigError, HypothesisViolation, NotFoundError, ValidationError
from chgsim.models import Verdict
from chgsim.services.coefficients import (
    CoefficientMode,
    CoefficientSet,
    available_fields,
    get_scalar_field,
    get_vector_field,
)
from chgsim.services.coefficients.validators import (
    check_divergence_free,
    check_ha,
    check_tangency,
    field_epsilon,
    hypothesis_h_epsilon,
    hypothesis_h_epsilon_field,
    validate_coefficients,
)
from chgsim.services.grid import CellField


class TestRegistry:
    """Test the built-in field registries."""

    def test_unknown_vector_field(self):
        with pytest.raises(NotFoundError) as exc:
            get_vector_field("whirlpool")

        assert "vortex" in exc.value.details["available"]

    def test_bad_parameters(self):
        with pytest.raises(ConfigError):
            get_scalar_field("constant", level=1.0)

    def test_describe(self):
        field = get_vector_field("vortex", omega=0.2)

        assert field.describe() == "vortex(omega=0.2)"

    def test_available_fields(self):
        available = available_fields()

        assert available["scalar"] == ["bump", "constant", "saturating"]
        assert "modulated_vortex" in available["vector"]


class TestStreamFunctionFields:
    """Test that stream-function fields are discretely solenoidal and tangential."""

    @pytest.mark.parametrize("name,params", [
        ("vortex", {"omega": 0.3}),
        ("rotation", {"omega": 1.0, "x0": 0.5, "y0": 0.5}),
        ("shear", {"omega": 0.2}),
    ])
    def test_divergence_free(self, grid_2d, name, params):
        assert check_divergence_free(get_vector_field(name, **params), grid_2d) < 1e-12

    def test_vortex_tangential(self, grid_2d):
        assert check_tangency(get_vector_field("vortex", omega=0.3), grid_2d) < 1e-14

    def test_constant_field_not_tangential(self, grid_2d):
        field = get_vector_field("constant", values=[0.5, 0.0])

        assert check_tangency(field, grid_2d) == pytest.approx(0.5)
        assert check_divergence_free(field, grid_2d) < 1e-14

    def test_linear_field_divergence(self, grid_2d):
        field = get_vector_field("linear", m11=1.0)

        assert check_divergence_free(field, grid_2d) == pytest.approx(1.0)

    def test_sine_field_tangential_not_solenoidal(self, grid_1d):
        field = get_vector_field("sine", amplitude=0.3)

        assert check_tangency(field, grid_1d) < 1e-14
        assert check_divergence_free(field, grid_1d) == pytest.approx(0.3 * np.pi, rel=1e-2)

    def test_modulated_vortex_divergence_free_at_state(self, grid_2d, cosine_psi_2d):
        field = get_vector_field("modulated_vortex", kappa=0.5)

        assert check_divergence_free(field, grid_2d, cosine_psi_2d) < 1e-12


class TestHypothesisEpsilon:
    """Test the ellipticity margin."""

    def test_identity_data(self):
        assert hypothesis_h_epsilon(1.0, [0.0], [0.0], [[1.0]]) == pytest.approx(1.0)

    def test_large_drift_violates(self):
        assert hypothesis_h_epsilon(1.0, [1.5], [1.5], [[1.0]]) == pytest.approx(-0.5)

    def test_check_ha_margin(self):
        ok, margin = check_ha(1.0, [0.0, 0.0], [0.0, 0.0], np.eye(2), 0.5)

        assert ok
        assert margin == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [2, 3])
    def test_margin_implies_matrix_inequality(self, n):
        rng = np.random.default_rng(20 + n)
        admissible = 0
        for _ in range(1000):
            beta = rng.uniform(0.5, 3.0)
            a, c = rng.normal(scale=0.3, size=(2, n))
            G = rng.normal(size=(n, n))
            B = G @ G.T + rng.uniform(0.5, 2.0) * np.eye(n)
            epsilon = hypothesis_h_epsilon(beta, a, c, B)
            if epsilon <= 0.0:
                continue
            admissible += 1

            ok, margin = check_ha(beta, a, c, B, epsilon)

            assert ok, (beta, a, c, B, margin)
            assert margin >= -1e-10

        assert admissible > 200

    def test_field_epsilon_constant(self, coeffs_1d, grid_1d):
        epsilon, _ = field_epsilon(coeffs_1d, grid_1d)

        assert epsilon == pytest.approx(1.0)
        assert coeffs_1d.epsilon == pytest.approx(1.0)

    def test_field_epsilon_vortex_positive(self, coeffs_2d, grid_2d):
        epsilon, location = field_epsilon(coeffs_2d, grid_2d)

        assert 0.0 < epsilon < 1.0
        assert len(location) == 2

    def test_sign_changing_mobility_raises(self, grid_1d):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("bump", b0=0.5, amplitude=1.0),
        )

        with pytest.raises(HypothesisViolation) as exc:
            field_epsilon(coeffs, grid_1d)

        assert exc.value.exit_code == 2
        assert exc.value.details["epsilon"] < 0.0

    def test_non_strict_returns_negative(self, grid_1d):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("bump", b0=0.5, amplitude=1.0),
        )

        epsilon, _ = field_epsilon(coeffs, grid_1d, strict=False)

        assert epsilon < 0.0
        assert coeffs.epsilon is None

    def test_non_strict_clears_stale_margin(self, grid_1d):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("bump", b0=0.5, amplitude=1.0),
        )
        coeffs.epsilon = 0.5

        epsilon, location = field_epsilon(coeffs, grid_1d, strict=False)

        assert epsilon < 0.0
        assert location
        assert coeffs.epsilon is None

    def test_positive_margin_replaces_previous(self, coeffs_1d, grid_1d):
        coeffs_1d.epsilon = 0.25

        field_epsilon(coeffs_1d, grid_1d)

        assert coeffs_1d.epsilon == pytest.approx(1.0)


class TestCoefficientSet:
    """Test mode handling of the coefficient set."""

    def test_state_dependent_needs_quasilinear(self):
        with pytest.raises(ValidationError, match="quasilinear"):
            CoefficientSet(
                beta=1.0,
                a=get_vector_field("constant", values=[0.0]),
                c=get_vector_field("constant", values=[0.0]),
                b=get_scalar_field("saturating", b0=1.0, b1=0.5),
            )

    def test_nonpositive_beta(self):
        with pytest.raises(ValidationError):
            CoefficientSet(
                beta=0.0,
                a=get_vector_field("constant", values=[0.0]),
                c=get_vector_field("constant", values=[0.0]),
                b=get_scalar_field("constant", value=1.0),
            )

    def test_freeze_quasilinear_uses_state(self, grid_1d):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("saturating", b0=1.0, b1=0.5),
            mode=CoefficientMode.QUASILINEAR,
        )
        low = coeffs.freeze(grid_1d, CellField(grid_1d, np.zeros(grid_1d.shape)))
        high = coeffs.freeze(grid_1d, CellField(grid_1d, np.ones(grid_1d.shape)))

        np.testing.assert_allclose(low.b_faces[0], 1.0)
        np.testing.assert_allclose(high.b_faces[0], 1.25)
        assert not low.same_as(high)


class TestValidateCoefficients:
    """Test the aggregated coefficient report."""

    def test_passing_report(self, coeffs_2d, grid_2d):
        report = validate_coefficients(coeffs_2d, grid_2d)

        assert report.passed
        assert {row.quantity for row in report.rows} >= {"beta", "epsilon", "div_a", "tangency_c"}

    def test_failing_tangency(self, grid_2d):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.3, 0.0]),
            c=get_vector_field("constant", values=[0.0, 0.0]),
            b=get_scalar_field("constant", value=1.0),
        )

        report = validate_coefficients(coeffs, grid_2d)
        verdicts = {row.quantity: row.verdict for row in report.rows}

        assert not report.passed
        assert verdicts["tangency_a"] == Verdict.FAIL
        assert verdicts["div_a"] == Verdict.PASS


class TestEpsilonField:
    """Test the pointwise closed form for B = bI."""

    def test_matches_eigenvalue_form(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            beta, b = rng.uniform(0.2, 2.0, size=2)
            a, c = rng.normal(scale=0.5, size=2), rng.normal(scale=0.5, size=2)

            closed = hypothesis_h_epsilon_field(beta, (a + c)[:, None], np.array([b]))[0]

            assert closed == pytest.approx(hypothesis_h_epsilon(beta, a, c, b * np.eye(2)), abs=1e-12)

    def test_one_dimension_drops_mobility_eigenvalue(self):
        eps = hypothesis_h_epsilon_field(1.0, np.zeros((1, 3)), np.full(3, 4.0))

        np.testing.assert_allclose(eps, 1.0)
