"""Unit tests for the linearly-implicit time stepper."""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from chgsim.core.exceptions import HypothesisViolation, ValidationError
from chgsim.services.coefficients import CoefficientMode, CoefficientSet, get_scalar_field, get_vector_field
from chgsim.services.coefficients.validators import field_epsilon
from chgsim.services.grid import CellField, integrate, laplacian_matrix, make_grid
from chgsim.services.potential import make_potential, validate_growth
from chgsim.services.solver import (
    Simulation,
    SystemCache,
    init_state,
    step,
    with_shifted_mean,
)


def _run(state, steps, tau, coeffs, potential, data=None, **kwargs):
    records = []
    for _ in range(steps):
        state, record = step(state, tau, coeffs, potential, data, **kwargs)
        records.append(record)
    return state, records


class TestInitState:
    """Test the initial elliptic solve."""

    def test_mu_from_potential_and_laplacian(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        state = init_state(grid_1d, cosine_psi_1d, coeffs_1d, double_well)

        expected = double_well.dphi(cosine_psi_1d.flat) - laplacian_matrix(grid_1d) @ cosine_psi_1d.flat

        np.testing.assert_allclose(state.mu.flat, expected, atol=1e-12)
        assert state.step == 0
        assert state.mass0 == pytest.approx(integrate(cosine_psi_1d))

    def test_rejects_sign_changing_mobility(self, grid_1d, cosine_psi_1d, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("bump", b0=0.5, amplitude=1.0),
        )

        with pytest.raises(HypothesisViolation):
            init_state(grid_1d, cosine_psi_1d, coeffs, double_well)

    def test_quasilinear_rejects_non_tangential_field(self, grid_2d, cosine_psi_2d, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.2, 0.0]),
            c=get_vector_field("constant", values=[0.0, 0.0]),
            b=get_scalar_field("constant", value=1.0),
            mode=CoefficientMode.QUASILINEAR,
        )

        with pytest.raises(ValidationError, match="tangential"):
            init_state(grid_2d, cosine_psi_2d, coeffs, double_well)

    def test_semilinear_only_warns_for_non_tangential_field(self, grid_2d, cosine_psi_2d, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.2, 0.0]),
            c=get_vector_field("constant", values=[0.0, 0.0]),
            b=get_scalar_field("constant", value=1.0),
        )

        state = init_state(grid_2d, cosine_psi_2d, coeffs, double_well)

        assert np.all(np.isfinite(state.mu.values))


class TestStep1D:
    """Test discrete invariants of the 1D stepper."""

    @pytest.fixture
    def trajectory(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        state0 = init_state(grid_1d, cosine_psi_1d, coeffs_1d, double_well)
        state, records = _run(state0, 20, 0.01, coeffs_1d, double_well)
        return state0, state, records

    def test_mass_conserved(self, trajectory):
        state0, state, records = trajectory

        assert abs(integrate(state.psi) - integrate(state0.psi)) < 1e-12
        assert all(r.mass_balance_residual < 1e-12 for r in records)

    def test_energy_nonincreasing(self, trajectory):
        _, _, records = trajectory
        energies = [r.energy for r in records]

        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_energy_identity_leaves_only_potential_remainder(self, trajectory):
        _, _, records = trajectory

        assert max(abs(r.energy_identity_residual - abs(r.potential_remainder)) for r in records) < 1e-10
        assert max(r.energy_identity_residual for r in records) > 0.0

    def test_mean_mu_identity_closes(self, trajectory):
        _, _, records = trajectory

        assert max(r.mean_mu_residual for r in records) < 1e-10

    def test_dissipation_inequality(self, trajectory):
        _, _, records = trajectory

        assert all(r.dissipation_ok is True for r in records)

    def test_time_advances(self, trajectory):
        _, state, records = trajectory

        assert state.step == 20
        assert state.t == pytest.approx(0.2)
        assert [r.step for r in records] == list(range(1, 21))

    def test_rejects_nonpositive_tau(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        state = init_state(grid_1d, cosine_psi_1d, coeffs_1d, double_well)

        with pytest.raises(ValidationError):
            step(state, 0.0, coeffs_1d, double_well)

    def test_picard_keeps_identity(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        state = init_state(grid_1d, cosine_psi_1d, coeffs_1d, double_well)

        _, records = _run(state, 5, 0.01, coeffs_1d, double_well, picard=True)

        assert max(abs(r.energy_identity_residual - abs(r.potential_remainder)) for r in records) < 1e-9
        assert max(r.mass_balance_residual for r in records) < 1e-12


class TestQuasilinear:
    """Test the quasilinear freezing path."""

    def test_state_independent_matches_semilinear_bitwise(self, grid_1d, cosine_psi_1d, double_well):
        def make(mode):
            return CoefficientSet(
                beta=1.0,
                a=get_vector_field("constant", values=[0.0]),
                c=get_vector_field("constant", values=[0.0]),
                b=get_scalar_field("constant", value=1.0),
                mode=mode,
            )

        semi, quasi = make(CoefficientMode.SEMILINEAR), make(CoefficientMode.QUASILINEAR)
        s1, _ = _run(init_state(grid_1d, cosine_psi_1d, semi, double_well), 5, 0.01, semi, double_well)
        s2, _ = _run(init_state(grid_1d, cosine_psi_1d, quasi, double_well), 5, 0.01, quasi, double_well)

        assert np.array_equal(s1.psi.values, s2.psi.values)
        assert np.array_equal(s1.mu.values, s2.mu.values)

    def test_saturating_mobility_conserves_mass(self, grid_1d, cosine_psi_1d, double_well):
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("saturating", b0=1.0, b1=0.5),
            mode=CoefficientMode.QUASILINEAR,
        )
        state0 = init_state(grid_1d, cosine_psi_1d, coeffs, double_well)

        state, records = _run(state0, 10, 0.01, coeffs, double_well)

        assert abs(integrate(state.psi) - state0.mass0) < 1e-12
        assert max(abs(r.energy_identity_residual - abs(r.potential_remainder)) for r in records) < 1e-10

    @pytest.fixture
    def saturating(self):
        return CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("saturating", b0=0.5, b1=0.5),
            mode=CoefficientMode.QUASILINEAR,
        )

    @pytest.fixture
    def offset_psi(self, grid_1d):
        return CellField(grid_1d, 0.5 + 0.3 * np.cos(np.pi * grid_1d.cell_centers()[0]))

    def test_epsilon_recertified_each_step(self, grid_1d, offset_psi, saturating, double_well):
        state = init_state(grid_1d, offset_psi, saturating, double_well)
        expected, records = [], []
        for _ in range(4):
            expected.append(field_epsilon(saturating, grid_1d, state.psi, strict=False)[0])
            state, record = step(state, 0.01, saturating, double_well)
            records.append(record)

        assert [r.epsilon for r in records] == expected
        # min b = 0.5 + 0.5 psi^2 / (1 + psi^2) rises as psi relaxes to its mean 0.5
        assert records[-1].epsilon > records[0].epsilon
        assert all(r.coefficients_ok is True for r in records)
        assert all(r.dissipation_ok is True for r in records)

    def test_lost_ellipticity_is_counted(self, mocker, offset_psi, saturating, double_well):
        real = field_epsilon

        def fake(coeffs, grid, psi=None, strict=True):
            return real(coeffs, grid, psi, strict) if strict else (-0.1, [0.5])

        mocker.patch("chgsim.services.solver.field_epsilon", side_effect=fake)

        result = Simulation(saturating, double_well, tau=0.01, steps=3, keep_records=True).run(offset_psi)

        assert result.stats["hypothesis_failures"] == 3
        assert result.stats["coefficient_check_failures"] == 0
        assert [r.epsilon for r in result.records[1:]] == [-0.1, -0.1, -0.1]
        assert all(r.dissipation_ok is None for r in result.records[1:])


class TestStep2D:
    """Test the GMRES path with vortex drift."""

    def test_invariants(self, grid_2d, cosine_psi_2d, coeffs_2d, double_well):
        state0 = init_state(grid_2d, cosine_psi_2d, coeffs_2d, double_well)

        state, records = _run(state0, 5, 0.01, coeffs_2d, double_well)

        assert abs(integrate(state.psi) - state0.mass0) < 1e-12
        assert all(r.mass_balance_residual < 1e-12 for r in records)
        assert records[-1].energy < records[0].energy
        assert max(abs(r.energy_identity_residual - abs(r.potential_remainder)) for r in records) < 1e-5

    def test_cache_reuses_system(self, grid_2d, cosine_psi_2d, coeffs_2d, double_well):
        cache = SystemCache(maxsize=2)
        state = init_state(grid_2d, cosine_psi_2d, coeffs_2d, double_well)
        state, _ = step(state, 0.01, coeffs_2d, double_well, cache=cache)
        first = cache.get(grid_2d, state.frozen, coeffs_2d.beta, double_well.stabilization, 0.01)

        step(state, 0.01, coeffs_2d, double_well, cache=cache)
        second = cache.get(grid_2d, state.frozen, coeffs_2d.beta, double_well.stabilization, 0.01)

        assert first is second


class TestShiftedMean:
    """Test the mean-shift helper."""

    def test_shift(self, grid_1d, double_well):
        psi0 = CellField(grid_1d, 0.4 + 0.1 * np.cos(np.pi * grid_1d.cell_centers()[0]))

        shifted_psi, potential, mean = with_shifted_mean(psi0, double_well)

        assert integrate(shifted_psi) == pytest.approx(0.0, abs=1e-14)
        assert mean == pytest.approx(integrate(psi0))
        assert potential.phi(0.0) == pytest.approx(double_well.phi(mean))


class TestSimulation:
    """Test the run loop."""

    def test_callbacks_and_stats(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        records, snapshots = [], []
        simulation = Simulation(
            coeffs_1d,
            double_well,
            tau=0.01,
            steps=5,
            snapshot_every=2,
            on_record=records.append,
            on_snapshot=lambda state: snapshots.append(state.step),
            growth=validate_growth(double_well),
        )

        result = simulation.run(cosine_psi_1d)

        assert [r.step for r in records] == [0, 1, 2, 3, 4, 5]
        assert snapshots == [0, 2, 4, 5]
        assert result.stats["steps"] == 5
        assert result.stats["dissipation_failures"] == 0
        assert result.stats["energy_increases"] == 0
        assert result.stats["lower_bound_failures"] == 0
        assert not result.steady

    def test_uniform_state_detected_at_once(self, grid_1d, coeffs_1d, double_well):
        simulation = Simulation(coeffs_1d, double_well, tau=0.01, steps=50)

        result = simulation.run(CellField(grid_1d, np.zeros(grid_1d.shape)))

        assert result.steady
        assert result.state.step == 1
        assert result.equilibrium.mu_inf == pytest.approx(0.0, abs=1e-14)

    def test_keep_records(self, grid_1d, cosine_psi_1d, coeffs_1d, double_well):
        result = Simulation(coeffs_1d, double_well, tau=0.01, steps=3, keep_records=True).run(cosine_psi_1d)

        assert len(result.records) == 4
        assert result.last_record.step == 3

    def test_rejects_nonpositive_tau(self, coeffs_1d, double_well):
        with pytest.raises(ValidationError):
            Simulation(coeffs_1d, double_well, tau=-1.0)


class TestViscousLimit:
    """a = c = 0, b = 1 reduces to the viscous Cahn-Hilliard scheme."""

    N = 64
    TAU = 1e-3

    @pytest.fixture
    def grid(self):
        return make_grid(1, [1.0], [self.N])

    @pytest.fixture
    def reference_matrix(self, double_well):
        h = 1.0 / self.N
        main = np.full(self.N, -2.0)
        main[[0, -1]] = -1.0
        off = np.ones(self.N - 1)
        L = sp.diags([off, main, off], [-1, 0, 1]) / h ** 2
        eye = sp.identity(self.N)
        shift = 1.0 / self.TAU + double_well.stabilization
        return sp.bmat([[eye, -self.TAU * L], [L - shift * eye, eye]], format="csc")

    def test_block_matrix_matches_direct_assembly(self, grid, coeffs_1d, double_well, reference_matrix):
        psi0 = CellField(grid, 0.3 * np.cos(np.pi * grid.cell_centers()[0]))
        state = init_state(grid, psi0, coeffs_1d, double_well)

        system = SystemCache().get(grid, state.frozen, 1.0, double_well.stabilization, self.TAU)
        diff = abs(system.matrix - reference_matrix).max()

        assert diff <= 1e-12 * abs(reference_matrix).max()

    def test_trajectory_matches_direct_solve(self, grid, coeffs_1d, double_well, reference_matrix):
        x = grid.cell_centers()[0]
        psi0 = CellField(grid, 0.3 * np.cos(np.pi * x) + 0.05 * np.cos(3 * np.pi * x))
        state = init_state(grid, psi0, coeffs_1d, double_well)
        S = double_well.stabilization
        reference = psi0.flat.copy()

        for _ in range(10):
            state, _ = step(state, self.TAU, coeffs_1d, double_well)
            rhs2 = -reference / self.TAU + double_well.dphi(reference) - S * reference
            reference = spsolve(reference_matrix, np.concatenate([reference, rhs2]))[:self.N]

        np.testing.assert_allclose(state.psi.flat, reference, rtol=0.0, atol=1e-11)


@pytest.mark.slow
class TestLongRun:
    """Run a 1D relaxation until equilibrium is declared."""

    MEAN = 0.1

    @pytest.fixture(scope="class")
    def result(self):
        grid = make_grid(1, [1.0], [256])
        x = grid.cell_centers()[0]
        coeffs = CoefficientSet(
            beta=1.0,
            a=get_vector_field("constant", values=[0.0]),
            c=get_vector_field("constant", values=[0.0]),
            b=get_scalar_field("constant", value=1.0),
        )
        potential = make_potential("double_well")
        psi0 = CellField(grid, self.MEAN + 0.3 * np.cos(np.pi * x))
        return Simulation(coeffs, potential, tau=1e-3, steps=100_000, keep_records=True).run(psi0), potential

    def test_reaches_equilibrium(self, result):
        run, potential = result
        report = run.equilibrium

        assert run.steady
        assert report.rate_mu < 1e-8
        assert report.mu_deviation <= 1e-8
        assert report.stationary_residual <= 1e-6
        assert report.mean_psi == pytest.approx(self.MEAN, abs=1e-10)
        assert report.mu_inf == pytest.approx(float(potential.dphi(self.MEAN)), abs=1e-8)

    def test_mass_drift(self, result):
        run, _ = result
        mass0 = run.records[0].mass

        assert max(abs(r.mass - mass0) for r in run.records) <= 1e-10 * abs(mass0)

    def test_mean_mu_identity(self, result):
        run, _ = result

        assert max(r.mean_mu_residual for r in run.records) <= 1e-10

    def test_energy_and_dissipation(self, result):
        run, _ = result
        energies = [r.energy for r in run.records]

        assert max(b - a for a, b in zip(energies, energies[1:])) <= 1e-12
        assert all(r.dissipation_ok is True for r in run.records[1:])
        assert run.stats["dissipation_failures"] == 0
