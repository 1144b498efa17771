"""Unit tests for initial conditions, sources and boundary data."""

import numpy as np
import pytest

from chgsim.core.exceptions import ConfigError, NotFoundError, ValidationError
from chgsim.models import BuiltinRef, DataBlock
from chgsim.services.grid import boundary_integral, make_grid
from chgsim.services.manufactured import default_case
from chgsim.services.sources import (
    ConstantSource,
    FaceBoundary,
    SourceData,
    build_source_data,
    check_compatibility,
    get_initial_condition,
    initial_field,
)


class TestInitialConditions:
    """Test the initial-condition registry."""

    def test_cosine(self, grid_1d):
        field = initial_field(BuiltinRef(name="cosine", params={"mean": 0.1, "amplitude": 0.2}), grid_1d)
        x = grid_1d.cell_centers()[0]

        np.testing.assert_allclose(field.values, 0.1 + 0.2 * np.cos(np.pi * x))

    def test_noise_is_seeded(self, grid_2d):
        ref = BuiltinRef(name="noise", params={"mean": 0.0, "amplitude": 0.05})

        first = initial_field(ref, grid_2d, seed=7).values
        second = initial_field(ref, grid_2d, seed=7).values
        other = initial_field(ref, grid_2d, seed=8).values

        assert np.array_equal(first, second)
        assert not np.array_equal(first, other)
        assert np.max(np.abs(first)) <= 0.05

    def test_unknown_initial_condition(self):
        with pytest.raises(NotFoundError):
            get_initial_condition(BuiltinRef(name="checkerboard"))

    def test_tanh_width_must_be_positive(self):
        with pytest.raises(ValidationError):
            get_initial_condition(BuiltinRef(name="tanh_profile", params={"width": 0.0}))


class TestBoundaryData:
    """Test boundary sources."""

    def test_face_boundary_outward_integral(self, grid_2d):
        field = FaceBoundary("top", 0.5).field(grid_2d, 0.0)

        assert boundary_integral(field) == pytest.approx(0.5)

    def test_unknown_side(self):
        with pytest.raises(ValidationError):
            FaceBoundary("front", 1.0)

    def test_homogeneous_flag(self):
        zero = SourceData.zero()

        assert zero.homogeneous
        assert not SourceData(ConstantSource(1.0), zero.g, zero.h1, zero.h2).homogeneous
        assert not SourceData(zero.f, zero.g, zero.h1, FaceBoundary("left", 0.1)).homogeneous
        assert SourceData(ConstantSource(0.0), zero.g, zero.h1, FaceBoundary("left", 0.0)).homogeneous


class TestBuildSourceData:
    """Test resolving the data section."""

    def test_defaults_are_zero(self):
        assert build_source_data(DataBlock()).homogeneous

    def test_constant_source(self, grid_1d):
        data = build_source_data(DataBlock(f=BuiltinRef(name="constant", params={"value": 0.3})))

        assert not data.homogeneous
        np.testing.assert_allclose(data.f.values(grid_1d, 0.0), 0.3)

    def test_manufactured_needs_case(self):
        with pytest.raises(ConfigError):
            build_source_data(DataBlock(f=BuiltinRef(name="manufactured")))

    def test_manufactured_with_case(self, grid_1d):
        case = default_case(dimension=1)
        block = DataBlock(
            f=BuiltinRef(name="manufactured"),
            g=BuiltinRef(name="manufactured"),
            h2=BuiltinRef(name="manufactured"),
        )

        data = build_source_data(block, manufactured=case)

        np.testing.assert_allclose(data.f.values(grid_1d, 0.1), case.f(grid_1d.cell_centers(), 0.1))
        assert data.h2.is_zero


class TestCompatibility:
    """Test the Neumann compatibility check."""

    def test_cosine_is_compatible(self):
        grid = make_grid(2, [1.0, 2.0], [8, 8])
        initial = get_initial_condition(BuiltinRef(name="cosine", params={"mode": 2, "mode_y": 1}))

        assert check_compatibility(initial, SourceData.zero(), grid) < 1e-8

    def test_tanh_is_not_compatible(self, grid_1d):
        initial = get_initial_condition(BuiltinRef(name="tanh_profile", params={"width": 0.2}))

        with pytest.raises(ValidationError) as exc:
            check_compatibility(initial, SourceData.zero(), grid_1d)

        assert exc.value.details["mismatch"] > 1e-3

    def test_noise_compatible_by_closure(self, grid_1d):
        initial = get_initial_condition(BuiltinRef(name="noise"))

        assert check_compatibility(initial, SourceData.zero(), grid_1d) == 0.0
