"""Linearly-implicit stabilized time stepper for the coupled (psi, mu) system.

One step solves, for v = (psi' - psi) / tau,

    v - div(a v) - div(b grad mu') = f'                                  (flux b grad mu . nu = h1)
    mu' - div(c mu') - beta v + lap psi' - [Phi'(psi) + S (psi' - psi)] = g'   (d psi / d nu = h2)

as one sparse block system in the unknowns (psi', mu'). Advective terms are in
conservative form with face-averaged transported quantities and zero boundary
flux, so mass and the mean chemical potential obey exact discrete identities.
"""

import hashlib
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import LinearOperator, gmres, splu, spsolve

from chgsim.config import settings
from chgsim.core.exceptions import SolverError, ValidationError
from chgsim.core.logger import logger
from chgsim.models import DiagnosticsRecord, EquilibriumReport, GrowthReport
from chgsim.services import diagnostics
from chgsim.services.coefficients import CoefficientMode, CoefficientSet, FrozenCoefficients
from chgsim.services.coefficients.validators import (
    check_divergence_free,
    check_tangency,
    field_epsilon,
)
from chgsim.services.grid import (
    CellField,
    GridSpec,
    boundary_integral,
    divergence_matrix,
    face_average_matrix,
    gradient_matrix,
    integrate,
    laplacian_matrix,
)
from chgsim.services.potential import PotentialSpec, shifted
from chgsim.services.sources import SourceData
from chgsim.services.steady import SteadyDetector, equilibrium_report

BANDWIDTH = 3


@dataclass
class SolverState:
    """Time level of a trajectory."""

    t: float
    step: int
    psi: CellField
    mu: CellField
    dpsi_dt: CellField
    frozen: FrozenCoefficients
    phi_lin: np.ndarray
    mass0: float
    source_mass: float = 0.0

    @property
    def grid(self) -> GridSpec:
        return self.psi.grid


# =====================================
# LINEAR SYSTEM
# =====================================


class BlockSystem:
    """Assembled block matrix for one (grid, coefficients, beta, S, tau)."""

    def __init__(self, grid: GridSpec, frozen: FrozenCoefficients, beta: float, S: float, tau: float):
        self.grid = grid
        self.tau = tau
        # A [1; s 1] = [1; 0] for tangential, divergence-free a and c
        self.mass_shift = beta / tau + S
        n = grid.n_cells
        D = divergence_matrix(grid)
        avg = face_average_matrix(grid)
        eye = sp.identity(n, format="csr")

        a_flux = sp.diags(frozen.flat("a")) @ avg
        c_flux = sp.diags(frozen.flat("c")) @ avg
        b_flux = sp.diags(frozen.flat("b")) @ gradient_matrix(grid)

        self.K11 = (eye - D @ a_flux).tocsr()
        self.K12 = (-tau * (D @ b_flux)).tocsr()
        self.K21 = (laplacian_matrix(grid) - (beta / tau + S) * eye).tocsr()
        self.K22 = (eye - D @ c_flux).tocsr()
        self.matrix = sp.bmat([[self.K11, self.K12], [self.K21, self.K22]], format="csr")

        if grid.dimension == 1:
            self._banded = self._band_form()
        else:
            # a = c = 0 block as preconditioner
            precond = sp.bmat([[eye, self.K12], [self.K21, eye]], format="csc")
            lu = splu(precond)
            self._precond = LinearOperator(self.matrix.shape, matvec=lu.solve)

    def _band_form(self):
        n = self.grid.n_cells
        perm = np.empty(2 * n, dtype=int)
        perm[0::2] = np.arange(n)
        perm[1::2] = n + np.arange(n)
        permuted = self.matrix[perm][:, perm]
        ab = np.zeros((2 * BANDWIDTH + 1, 2 * n))
        for k in range(-BANDWIDTH, BANDWIDTH + 1):
            diag = permuted.diagonal(k)
            if k >= 0:
                ab[BANDWIDTH - k, k:] = diag
            else:
                ab[BANDWIDTH - k, :2 * n + k] = diag
        return perm, ab

    def _project_mass(self, x: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Remove the mean of the first-block Krylov residual so mass telescopes exactly."""
        n = self.grid.n_cells
        drift = float(np.mean(rhs[:n] - self.K11 @ x[:n] - self.K12 @ x[n:]))
        x = x.copy()
        x[:n] += drift
        x[n:] += self.mass_shift * drift
        return x

    def solve(self, rhs: np.ndarray, x0: Optional[np.ndarray] = None) -> np.ndarray:
        """Solve the block system; raises SolverError on failure."""
        if self.grid.dimension == 1:
            perm, ab = self._banded
            try:
                y = solve_banded((BANDWIDTH, BANDWIDTH), ab, rhs[perm])
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SolverError("banded solve failed", {"reason": str(exc)}) from exc
            x = np.empty_like(y)
            x[perm] = y
        else:
            x, info = gmres(
                self.matrix,
                rhs,
                x0=x0,
                rtol=settings.LINEAR_SOLVER_RTOL,
                restart=settings.GMRES_RESTART,
                maxiter=settings.GMRES_MAXITER,
                M=self._precond,
            )
            if info != 0:
                residual = float(np.linalg.norm(self.matrix @ x - rhs))
                raise SolverError(
                    "GMRES did not converge",
                    {"info": int(info), "residual": residual, "rhs_norm": float(np.linalg.norm(rhs))},
                )
            x = self._project_mass(x, rhs)

        if not np.all(np.isfinite(x)):
            raise SolverError("non-finite values in the solution")
        residual = float(np.linalg.norm(self.matrix @ x - rhs))
        bound = 100.0 * settings.LINEAR_SOLVER_RTOL * max(float(np.linalg.norm(rhs)), 1.0)
        if residual > bound:
            raise SolverError("linear solve residual too large", {"residual": residual, "bound": bound})
        return x


class SystemCache:
    """Small LRU of assembled block systems keyed by content."""

    def __init__(self, maxsize: int = 4):
        self.maxsize = maxsize
        self._items: "OrderedDict[tuple, BlockSystem]" = OrderedDict()

    @staticmethod
    def _digest(frozen: FrozenCoefficients) -> str:
        h = hashlib.sha1()
        for name in ("a", "c", "b"):
            h.update(np.ascontiguousarray(frozen.flat(name)).tobytes())
        return h.hexdigest()

    def get(self, grid: GridSpec, frozen: FrozenCoefficients, beta: float, S: float, tau: float) -> BlockSystem:
        key = (grid, beta, S, tau, self._digest(frozen))
        if key in self._items:
            self._items.move_to_end(key)
            return self._items[key]
        system = BlockSystem(grid, frozen, beta, S, tau)
        self._items[key] = system
        if len(self._items) > self.maxsize:
            self._items.popitem(last=False)
        return system

    def clear(self) -> None:
        self._items.clear()


system_cache = SystemCache()


# =====================================
# STATE
# =====================================


def _frozen_checks(coeffs: CoefficientSet, grid: GridSpec, psi: CellField, strict: bool) -> None:
    tol = settings.VALIDATOR_TOL
    state = psi if coeffs.mode == CoefficientMode.QUASILINEAR else None
    for name, vf in (("a", coeffs.a), ("c", coeffs.c)):
        div = check_divergence_free(vf, grid, state)
        tang = check_tangency(vf, grid, state)
        if div <= tol and tang <= tol:
            continue
        details = {"field": name, "divergence": div, "tangency": tang, "tolerance": tol}
        if strict:
            raise ValidationError(f"frozen coefficient {name} is not divergence-free and tangential", details)
        logger.warning("Coefficient field fails divergence or tangency check", **details)


def init_state(
    grid: GridSpec,
    psi0: CellField,
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: Optional[SourceData] = None,
) -> SolverState:
    """
    State at t = 0 with mu from one elliptic solve at d psi / dt = 0.

    Raises:
        HypothesisViolation: epsilon of the coefficients (frozen at psi0) is not positive
        ValidationError: quasilinear frozen fields fail divergence or tangency checks
    """
    data = data or SourceData.zero()
    field_epsilon(coeffs, grid, psi0)
    _frozen_checks(coeffs, grid, psi0, strict=coeffs.mode == CoefficientMode.QUASILINEAR)

    frozen = coeffs.freeze(grid, psi0)
    D = divergence_matrix(grid)
    c_flux = sp.diags(frozen.flat("c")) @ face_average_matrix(grid)
    operator = (sp.identity(grid.n_cells, format="csr") - D @ c_flux).tocsc()

    phi_prime = potential.dphi(psi0.flat)
    h2 = data.h2.field(grid, 0.0).flat
    rhs = data.g.values(grid, 0.0).ravel() + phi_prime - laplacian_matrix(grid) @ psi0.flat - D @ h2
    mu = np.atleast_1d(spsolve(operator, rhs))
    if not np.all(np.isfinite(mu)):
        raise SolverError("non-finite chemical potential at t = 0")

    state = SolverState(
        t=0.0,
        step=0,
        psi=psi0.copy(),
        mu=CellField(grid, mu),
        dpsi_dt=CellField(grid, np.zeros(grid.shape)),
        frozen=frozen,
        phi_lin=phi_prime.reshape(grid.shape),
        mass0=integrate(psi0),
    )
    logger.info(
        "Initialized solver state",
        cells=grid.n_cells,
        mass=state.mass0,
        epsilon=coeffs.epsilon,
        mode=coeffs.mode.value,
    )
    return state


def step(
    state: SolverState,
    tau: float,
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: Optional[SourceData] = None,
    picard: bool = False,
    cache: Optional[SystemCache] = None,
    growth: Optional[GrowthReport] = None,
) -> Tuple[SolverState, DiagnosticsRecord]:
    """
    Advance one step of size tau.

    Args:
        state: current time level
        tau: step size (> 0)
        coeffs: coefficient set; quasilinear fields are frozen at the current psi
        potential: potential with stabilization S
        data: sources and boundary data (homogeneous by default)
        picard: re-anchor the linearisation at the latest iterate until it settles
        cache: assembled-system cache (module cache by default)
        growth: growth certificate for the energy lower-bound margin

    Returns:
        (new state, diagnostics record)
    """
    if not tau > 0.0:
        raise ValidationError("time step must be positive", {"tau": tau})
    data = data or SourceData.zero()
    cache = cache or system_cache
    grid = state.grid
    t_new = state.t + tau

    epsilon, coefficients_ok = coeffs.epsilon, None
    if coeffs.mode == CoefficientMode.QUASILINEAR:
        frozen = coeffs.freeze(grid, state.psi)
        if coeffs.state_dependent:
            epsilon, coefficients_ok = _advisory_checks(coeffs, grid, state.psi, state.step)
    else:
        frozen = state.frozen

    S = potential.stabilization
    system = cache.get(grid, frozen, coeffs.beta, S, tau)
    D = divergence_matrix(grid)
    psi = state.psi.flat
    n = grid.n_cells

    f = data.f.values(grid, t_new).ravel()
    g = data.g.values(grid, t_new).ravel()
    h1 = data.h1.field(grid, t_new)
    h2 = data.h2.field(grid, t_new)

    rhs1 = system.K11 @ psi + tau * f + tau * (D @ h1.flat)
    base2 = g - (coeffs.beta / tau) * psi - D @ h2.flat

    anchor = psi
    guess = np.concatenate([psi, state.mu.flat])
    iterations = settings.PICARD_MAX_ITER if picard else 1
    for it in range(iterations):
        rhs2 = base2 + potential.dphi(anchor) - S * anchor
        solution = system.solve(np.concatenate([rhs1, rhs2]), x0=guess)
        new_psi = solution[:n]
        used_anchor = anchor
        if not picard:
            break
        change = float(np.max(np.abs(new_psi - anchor)))
        anchor, guess = new_psi, solution
        if change <= settings.PICARD_TOL:
            break
    else:
        if picard:
            logger.warning("Picard iteration hit its cap", step=state.step + 1, iterations=iterations)

    new_mu = solution[n:]
    phi_lin = potential.dphi(used_anchor) + S * (new_psi - used_anchor)
    source_rate = integrate(CellField(grid, f)) + boundary_integral(h1)

    new_state = SolverState(
        t=t_new,
        step=state.step + 1,
        psi=CellField(grid, new_psi),
        mu=CellField(grid, new_mu),
        dpsi_dt=CellField(grid, (new_psi - psi) / tau),
        frozen=frozen,
        phi_lin=phi_lin.reshape(grid.shape),
        mass0=state.mass0,
        source_mass=state.source_mass + tau * source_rate,
    )
    record = diagnostics.build_record(
        state, new_state, tau, coeffs, potential, data, growth,
        epsilon=epsilon, coefficients_ok=coefficients_ok,
    )
    logger.debug("Step completed", step=new_state.step, t=t_new, energy=record.energy)
    return new_state, record


def _advisory_checks(
    coeffs: CoefficientSet,
    grid: GridSpec,
    psi: CellField,
    step_index: int,
) -> Tuple[float, bool]:
    """
    Re-certify coefficients frozen at psi after t = 0.

    Violations are logged, not raised. Returns (epsilon, divergence and tangency ok).
    """
    epsilon, location = field_epsilon(coeffs, grid, psi, strict=False)
    if epsilon <= 0.0:
        logger.warning("Frozen coefficients lose ellipticity", step=step_index, epsilon=epsilon,
                       location=location)
    tol = settings.VALIDATOR_TOL
    ok = True
    for name, vf in (("a", coeffs.a), ("c", coeffs.c)):
        div = check_divergence_free(vf, grid, psi)
        tang = check_tangency(vf, grid, psi)
        if div > tol or tang > tol:
            ok = False
            logger.warning("Frozen coefficient not divergence-free and tangential", field=name,
                           step=step_index, divergence=div, tangency=tang)
    return epsilon, ok


def with_shifted_mean(psi0: CellField, potential: PotentialSpec) -> Tuple[CellField, PotentialSpec, float]:
    """Shift psi0 to mean zero and the potential by the same constant."""
    mean = integrate(psi0) / psi0.grid.domain_volume
    return CellField(psi0.grid, psi0.values - mean), shifted(potential, mean), mean


# =====================================
# RUNNER
# =====================================

RecordCallback = Callable[[DiagnosticsRecord], None]
SnapshotCallback = Callable[[SolverState], None]

ENERGY_INCREASE_TOL = 1e-12


@dataclass
class SimulationResult:
    """Outcome of a run: last state, equilibrium report and run counters."""

    state: SolverState
    last_record: DiagnosticsRecord
    equilibrium: EquilibriumReport
    records: List[DiagnosticsRecord] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def steady(self) -> bool:
        return self.equilibrium.detected


class Simulation:
    """
    Fixed-step run with streaming diagnostics and steady detection.

    Each record is handed to ``on_record`` as soon as it exists; states are
    handed to ``on_snapshot`` at t = 0, every ``snapshot_every`` steps and at
    the end. The run stops at the step budget or when equilibrium is detected.
    """

    def __init__(
        self,
        coeffs: CoefficientSet,
        potential: PotentialSpec,
        data: Optional[SourceData] = None,
        tau: float = 1e-3,
        steps: int = 1000,
        tol_rate: float = 1e-8,
        tol_station: float = 1e-6,
        window: Optional[int] = None,
        picard: bool = False,
        growth: Optional[GrowthReport] = None,
        snapshot_every: int = 0,
        on_record: Optional[RecordCallback] = None,
        on_snapshot: Optional[SnapshotCallback] = None,
        keep_records: bool = False,
    ):
        if not tau > 0.0:
            raise ValidationError("time step must be positive", {"tau": tau})
        self.coeffs = coeffs
        self.potential = potential
        self.data = data or SourceData.zero()
        self.tau = tau
        self.steps = steps
        self.picard = picard
        self.growth = growth
        self.snapshot_every = snapshot_every
        self.on_record = on_record
        self.on_snapshot = on_snapshot
        self.keep_records = keep_records
        self.detector = SteadyDetector(tol_rate, tol_station, window)
        self.cache = SystemCache()

    def _emit(self, record: DiagnosticsRecord, records: List[DiagnosticsRecord]) -> None:
        if self.on_record is not None:
            self.on_record(record)
        if self.keep_records:
            records.append(record)

    def run(self, psi0: CellField) -> SimulationResult:
        """Run from psi0; raises SolverError or validator errors unchanged."""
        state = init_state(psi0.grid, psi0, self.coeffs, self.potential, self.data)
        record = diagnostics.initial_record(state, self.coeffs, self.potential, self.data, self.growth)
        records: List[DiagnosticsRecord] = []
        times, energies = [record.t], [record.energy]
        stats = {
            "steps": 0,
            "dissipation_failures": 0,
            "energy_increases": 0,
            "lower_bound_failures": 0,
            "hypothesis_failures": 0,
            "coefficient_check_failures": 0,
        }
        self._emit(record, records)
        if self.on_snapshot is not None:
            self.on_snapshot(state)

        logger.info("Simulation started", tau=self.tau, steps=self.steps, cells=psi0.grid.n_cells)
        detected = False
        self.detector.reset()
        for _ in range(self.steps):
            previous_energy = record.energy
            state, record = step(
                state, self.tau, self.coeffs, self.potential, self.data,
                picard=self.picard, cache=self.cache, growth=self.growth,
            )
            stats["steps"] += 1
            times.append(record.t)
            energies.append(record.energy)
            self._check(record, previous_energy, stats)
            self._emit(record, records)
            if self.on_snapshot is not None and self.snapshot_every and state.step % self.snapshot_every == 0:
                self.on_snapshot(state)
            if self.detector.update(state, record):
                detected = True
                break

        if self.on_snapshot is not None and not (self.snapshot_every and state.step % self.snapshot_every == 0):
            self.on_snapshot(state)
        equilibrium = equilibrium_report(state, record, detected, (times, energies), self.potential.analytic)
        logger.info(
            "Simulation completed",
            steps=stats["steps"],
            t=state.t,
            steady=detected,
            energy=record.energy,
            dissipation_failures=stats["dissipation_failures"],
        )
        return SimulationResult(state=state, last_record=record, equilibrium=equilibrium,
                                records=records, stats=stats)

    def _check(self, record: DiagnosticsRecord, previous_energy: float, stats: dict) -> None:
        if record.epsilon is not None and record.epsilon <= 0.0:
            stats["hypothesis_failures"] += 1
        if record.coefficients_ok is False:
            stats["coefficient_check_failures"] += 1
        if record.dissipation_ok is False:
            stats["dissipation_failures"] += 1
            logger.warning("Dissipation inequality not met", step=record.step, dE_dt=record.dE_dt)
        if self.data.homogeneous and record.energy > previous_energy + ENERGY_INCREASE_TOL:
            stats["energy_increases"] += 1
            logger.warning("Energy increased", step=record.step, increase=record.energy - previous_energy)
        if record.energy_lower_margin is not None and record.energy_lower_margin < 0.0:
            stats["lower_bound_failures"] += 1
            logger.warning("Energy below certified lower bound", step=record.step,
                           margin=record.energy_lower_margin)


__all__ = [
    "SolverState",
    "BlockSystem",
    "SystemCache",
    "Simulation",
    "SimulationResult",
    "init_state",
    "step",
    "with_shifted_mean",
]
