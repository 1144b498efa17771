"""Manufactured-solution case and convergence-order studies.

psi*(t, x) = exp(-t) cos(k x1), mu*(x) = cos(k x1), k = pi / L1. Both have
zero normal derivative on every side, so h1 = h2 = 0 for tangential a and c;
f and g follow by substitution into the system with the run's coefficients
and potential. The drift terms keep their divergence parts, so a and c need
not be divergence-free.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from chgsim.core.exceptions import ValidationError
from chgsim.core.logger import logger
from chgsim.services.coefficients import CoefficientSet, get_scalar_field, get_vector_field
from chgsim.services.grid import CellField, GridSpec, inner, make_grid
from chgsim.services.potential import PotentialSpec, make_potential
from chgsim.services.solver import init_state, step
from chgsim.services.sources import FunctionSource, SourceData, ZeroBoundary

GRADIENT_STEP = 1e-6


class ManufacturedCase:
    """Exact pair (psi*, mu*) with the sources that make it a solution."""

    def __init__(self, coeffs: CoefficientSet, potential: PotentialSpec, extents: Sequence[float]):
        if coeffs.state_dependent:
            raise ValidationError("the manufactured case needs state-independent coefficients")
        self.coeffs = coeffs
        self.potential = potential
        self.extents = tuple(float(v) for v in extents)
        self.k = np.pi / self.extents[0]

    def psi_exact(self, points: Sequence[np.ndarray], t: float) -> np.ndarray:
        return np.exp(-t) * np.cos(self.k * points[0])

    def mu_exact(self, points: Sequence[np.ndarray], t: float = 0.0) -> np.ndarray:
        return np.cos(self.k * points[0])

    def _shifted(self, points: Sequence[np.ndarray], axis: int, delta: float) -> List[np.ndarray]:
        return [p + delta if i == axis else p for i, p in enumerate(points)]

    def _divergence(self, vf, points: Sequence[np.ndarray]) -> np.ndarray:
        total = np.zeros(np.shape(points[0]))
        for axis in range(len(points)):
            plus = vf.evaluate(self._shifted(points, axis, GRADIENT_STEP), self.extents)[axis]
            minus = vf.evaluate(self._shifted(points, axis, -GRADIENT_STEP), self.extents)[axis]
            total += (plus - minus) / (2.0 * GRADIENT_STEP)
        return total

    def _db_dx1(self, points: Sequence[np.ndarray]) -> np.ndarray:
        b = self.coeffs.b
        plus = b.evaluate(self._shifted(points, 0, GRADIENT_STEP), self.extents)
        minus = b.evaluate(self._shifted(points, 0, -GRADIENT_STEP), self.extents)
        return (plus - minus) / (2.0 * GRADIENT_STEP)

    def f(self, points: Sequence[np.ndarray], t: float) -> np.ndarray:
        """psi_t - div(a psi_t) - b lap mu - grad b . grad mu."""
        k, x1 = self.k, points[0]
        decay = np.exp(-t)
        psi_t = -decay * np.cos(k * x1)
        dpsi_t_dx1 = k * decay * np.sin(k * x1)
        lap_mu = -k * k * np.cos(k * x1)
        dmu_dx1 = -k * np.sin(k * x1)
        a = self.coeffs.a.evaluate(points, self.extents)
        drift = a[0] * dpsi_t_dx1 + self._divergence(self.coeffs.a, points) * psi_t
        b = self.coeffs.b.evaluate(points, self.extents)
        return psi_t - drift - b * lap_mu - self._db_dx1(points) * dmu_dx1

    def g(self, points: Sequence[np.ndarray], t: float) -> np.ndarray:
        """mu - div(c mu) - beta psi_t + lap psi - Phi'(psi)."""
        k, x1 = self.k, points[0]
        decay = np.exp(-t)
        psi = decay * np.cos(k * x1)
        psi_t = -psi
        lap_psi = -k * k * psi
        mu = np.cos(k * x1)
        dmu_dx1 = -k * np.sin(k * x1)
        c = self.coeffs.c.evaluate(points, self.extents)
        drift = c[0] * dmu_dx1 + self._divergence(self.coeffs.c, points) * mu
        return mu - drift - self.coeffs.beta * psi_t + lap_psi - self.potential.dphi(psi)

    def source(self, which: str) -> FunctionSource:
        if which not in ("f", "g"):
            raise ValidationError(f"the manufactured case has no source '{which}'")
        return FunctionSource(getattr(self, which), name="manufactured")

    def source_data(self) -> SourceData:
        return SourceData(f=self.source("f"), g=self.source("g"), h1=ZeroBoundary(), h2=ZeroBoundary())

    def initial(self, grid: GridSpec) -> CellField:
        return CellField(grid, self.psi_exact(grid.cell_centers(), 0.0))


def default_case(dimension: int = 2, extents: Optional[Sequence[float]] = None) -> ManufacturedCase:
    """Double well, beta = 1, b = 1; vortex fields a and c in 2D, sine fields in 1D."""
    extents = tuple(extents) if extents is not None else (1.0,) * dimension
    if dimension == 2:
        a = get_vector_field("vortex", omega=0.2)
        c = get_vector_field("vortex", omega=0.1)
    else:
        a = get_vector_field("sine", amplitude=0.3)
        c = get_vector_field("sine", amplitude=0.2)
    coeffs = CoefficientSet(beta=1.0, a=a, c=c, b=get_scalar_field("constant", value=1.0))
    return ManufacturedCase(coeffs, make_potential("double_well"), extents)


def run_manufactured(case: ManufacturedCase, grid: GridSpec, tau: float, final_time: float) -> CellField:
    """psi at final_time from the exact initial state; final_time must be a multiple of tau."""
    steps = int(round(final_time / tau))
    if steps < 1 or abs(steps * tau - final_time) > 1e-9 * final_time:
        raise ValidationError("final time must be a positive multiple of tau", {"tau": tau, "final_time": final_time})
    data = case.source_data()
    state = init_state(grid, case.initial(grid), case.coeffs, case.potential, data)
    for _ in range(steps):
        state, _ = step(state, tau, case.coeffs, case.potential, data)
    return state.psi


def _l2(u: np.ndarray, grid: GridSpec) -> float:
    field = CellField(grid, u)
    return float(np.sqrt(inner(field, field)))


def _order(coarse: float, fine: float, ratio: float) -> float:
    if coarse <= 0.0 or fine <= 0.0:
        return float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))


def temporal_order(
    case: ManufacturedCase,
    cells: Sequence[int],
    taus: Sequence[float] = (0.02, 0.01, 0.005),
    final_time: float = 0.2,
) -> List[Dict[str, float]]:
    """
    Self-convergence in tau on one grid.

    Row k compares psi_tau[k] with psi_tau[k+1]; its order uses the previous row.
    """
    grid = make_grid(len(cells), case.extents, cells)
    finals = [run_manufactured(case, grid, tau, final_time).values for tau in taus]
    rows: List[Dict[str, float]] = []
    for k in range(len(taus) - 1):
        diff = _l2(finals[k] - finals[k + 1], grid)
        order = float("nan")
        if rows:
            order = _order(rows[-1]["difference"], diff, taus[k - 1] / taus[k])
        rows.append({"tau": float(taus[k]), "difference": diff, "order": order})
    logger.info("Temporal order study completed", orders=[r["order"] for r in rows])
    return rows


def spatial_order(
    case: ManufacturedCase,
    resolutions: Sequence[int] = (8, 16, 32),
    final_time: float = 0.1,
    tau_factor: float = 0.5,
) -> List[Dict[str, float]]:
    """Error against psi*(T) with tau = tau_factor h^2, for square grids of N cells per axis."""
    dimension = len(case.extents)
    rows: List[Dict[str, float]] = []
    for n in resolutions:
        grid = make_grid(dimension, case.extents, [n] * dimension)
        h = grid.spacing[0]
        steps = max(1, int(np.ceil(final_time / (tau_factor * h * h))))
        tau = final_time / steps
        psi = run_manufactured(case, grid, tau, final_time)
        error = _l2(psi.values - case.psi_exact(grid.cell_centers(), final_time), grid)
        order = _order(rows[-1]["error"], error, rows[-1]["h"] / h) if rows else float("nan")
        rows.append({"cells": float(n), "h": h, "tau": tau, "error": error, "order": order})
        logger.debug("Spatial refinement level", cells=n, error=error, order=order)
    logger.info("Spatial order study completed", orders=[r["order"] for r in rows])
    return rows
