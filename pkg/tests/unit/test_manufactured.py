"""Unit tests for the manufactured case and convergence studies."""

import numpy as np
import pytest

from chgsim.core.exceptions import ValidationError
from chgsim.services.coefficients import CoefficientMode, CoefficientSet, get_scalar_field, get_vector_field
from chgsim.services.grid import make_grid
from chgsim.services.manufactured import (
    ManufacturedCase,
    default_case,
    run_manufactured,
    spatial_order,
    temporal_order,
)


@pytest.fixture
def case_1d():
    return default_case(dimension=1)


class TestManufacturedCase:
    """Test the exact pair and its sources."""

    def test_sources_without_drift(self, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("constant", value=1.0),
        )
        case = ManufacturedCase(coeffs, double_well, [1.0])
        x = np.linspace(0.0, 1.0, 7)
        t = 0.3
        k = np.pi
        decay = np.exp(-t)
        psi = decay * np.cos(k * x)

        expected_f = -decay * np.cos(k * x) + k * k * np.cos(k * x)
        expected_g = np.cos(k * x) + psi - k * k * psi - (psi ** 3 - psi)

        np.testing.assert_allclose(case.f([x], t), expected_f, atol=1e-12)
        np.testing.assert_allclose(case.g([x], t), expected_g, atol=1e-12)

    def test_sources_keep_drift_divergence(self, case_1d):
        x = np.linspace(0.0, 1.0, 7)
        t = 0.3
        k = np.pi
        decay = np.exp(-t)
        psi = decay * np.cos(k * x)

        # (0.3 sin(kx) psi_t)' and (0.2 sin(kx) mu)' with psi_t = -psi, mu = cos(kx)
        expected_f = -psi + 0.3 * k * decay * np.cos(2 * k * x) + k * k * np.cos(k * x)
        expected_g = np.cos(k * x) - 0.2 * k * np.cos(2 * k * x) + psi - k * k * psi - (psi ** 3 - psi)

        np.testing.assert_allclose(case_1d.f([x], t), expected_f, atol=1e-8)
        np.testing.assert_allclose(case_1d.g([x], t), expected_g, atol=1e-8)

    def test_exact_pair_has_zero_normal_derivative(self, case_1d):
        grid = make_grid(1, [1.0], [16])
        normal = case_1d.source_data().h2.outward(grid, 0.0)

        assert normal == {}
        assert case_1d.initial(grid).values[0] == pytest.approx(np.cos(np.pi / 32))

    def test_rejects_state_dependent_coefficients(self, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("saturating", b0=1.0, b1=0.5),
            mode=CoefficientMode.QUASILINEAR,
        )

        with pytest.raises(ValidationError):
            ManufacturedCase(coeffs, double_well, [1.0])

    def test_unknown_source(self, case_1d):
        with pytest.raises(ValidationError):
            case_1d.source("h")

    def test_final_time_must_be_multiple_of_tau(self, case_1d):
        with pytest.raises(ValidationError):
            run_manufactured(case_1d, make_grid(1, [1.0], [8]), tau=0.03, final_time=0.1)


class TestConvergence1D:
    """Test convergence orders on the 1D case."""

    def test_spatial_order_two(self, case_1d):
        rows = spatial_order(case_1d, resolutions=(16, 32, 64), final_time=0.1)

        assert np.isnan(rows[0]["order"])
        assert rows[0]["error"] > rows[1]["error"] > rows[2]["error"]
        assert all(1.8 <= row["order"] <= 2.3 for row in rows[1:])

    def test_temporal_order_one(self, case_1d):
        rows = temporal_order(case_1d, [32], taus=(0.02, 0.01, 0.005, 0.0025), final_time=0.2)

        assert len(rows) == 3
        assert rows[0]["difference"] > rows[1]["difference"] > rows[2]["difference"]
        assert all(0.9 <= row["order"] <= 1.2 for row in rows[1:])


@pytest.mark.slow
class TestConvergence2D:
    """Test convergence orders on the 2D case with vortex drift."""

    def test_spatial_order(self):
        rows = spatial_order(default_case(dimension=2), resolutions=(8, 16, 32), final_time=0.05)

        assert rows[0]["error"] > rows[1]["error"] > rows[2]["error"]
        assert rows[-1]["order"] >= 1.8

    def test_temporal_order(self):
        case = default_case(dimension=2)

        rows = temporal_order(case, [12, 12], taus=(0.02, 0.01, 0.005, 0.0025), final_time=0.1)

        assert rows[-1]["order"] >= 0.9
