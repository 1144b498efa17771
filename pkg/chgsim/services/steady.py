"""Detection of convergence to a stationary state."""

from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from chgsim.config import settings
from chgsim.core.logger import logger
from chgsim.models import DiagnosticsRecord, EquilibriumReport
from chgsim.services.grid import integrate

if TYPE_CHECKING:
    from chgsim.services.solver import SolverState

FIXED_POINT_TOL = 1e-14
MIN_FIT_POINTS = 3


class SteadyDetector:
    """
    Counts consecutive steps with |d psi / dt|_2 and |grad mu|_2 below tol_rate.

    Equilibrium is declared once the count reaches the window, or at once when
    the step left psi unchanged to round-off and the stationary residual is
    below tol_station.
    """

    def __init__(self, tol_rate: float = 1e-8, tol_station: float = 1e-6, window: Optional[int] = None):
        self.tol_rate = tol_rate
        self.tol_station = tol_station
        self.window = window or settings.STEADY_WINDOW
        self.count = 0

    def reset(self) -> None:
        self.count = 0

    def update(self, state: "SolverState", record: DiagnosticsRecord) -> bool:
        slow = record.rate_psi < self.tol_rate and record.rate_mu < self.tol_rate
        self.count = self.count + 1 if slow else 0
        if not slow:
            return False
        scale = 1.0 + float(np.max(np.abs(state.psi.values)))
        fixed = record.max_update <= FIXED_POINT_TOL * scale and record.stationary_residual <= self.tol_station
        return fixed or self.count >= self.window


def decay_exponent(times: Sequence[float], energies: Sequence[float]) -> Optional[float]:
    """
    Least-squares rate k of E(t) - E_inf ~ exp(-k t), with E_inf the last energy.

    Reporting only; None when too few points lie above round-off.
    """
    if len(energies) < MIN_FIT_POINTS + 1:
        return None
    t = np.asarray(times[:-1], dtype=float)
    gap = np.asarray(energies[:-1], dtype=float) - float(energies[-1])
    keep = gap > 1e-14 * max(1.0, abs(float(energies[-1])))
    if np.count_nonzero(keep) < MIN_FIT_POINTS:
        return None
    slope, _ = np.polyfit(t[keep], np.log(gap[keep]), 1)
    return float(-slope)


def equilibrium_report(
    state: "SolverState",
    record: DiagnosticsRecord,
    detected: bool,
    energies: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    analytic_potential: bool = True,
) -> EquilibriumReport:
    """Report for the state at which detection fired (or the last state)."""
    mu = state.mu.values
    mu_inf = integrate(state.mu) / state.grid.domain_volume
    exponent = decay_exponent(*energies) if energies else None
    return EquilibriumReport(
        detected=detected,
        step=state.step,
        t=state.t,
        mu_inf=mu_inf,
        mu_deviation=float(np.max(np.abs(mu - mu_inf))),
        stationary_residual=record.stationary_residual,
        rate_psi=record.rate_psi,
        rate_mu=record.rate_mu,
        energy=record.energy,
        mean_psi=integrate(state.psi) / state.grid.domain_volume,
        decay_exponent=exponent,
        analytic_potential=analytic_potential,
        psi=state.psi.flat.tolist(),
    )


def detect_steady(
    tail: Sequence[Tuple["SolverState", DiagnosticsRecord]],
    tol_rate: float = 1e-8,
    tol_station: float = 1e-6,
    window: Optional[int] = None,
) -> Optional[EquilibriumReport]:
    """
    Scan a trajectory tail for equilibrium.

    Args:
        tail: (state, record) pairs in time order
        tol_rate: bound on |d psi / dt|_2 and |grad mu|_2
        tol_station: bound on the stationary residual for the fixed-point shortcut
        window: consecutive steps required (settings.STEADY_WINDOW by default)

    Returns:
        EquilibriumReport at the first detection, None otherwise
    """
    detector = SteadyDetector(tol_rate, tol_station, window)
    times: List[float] = []
    energies: List[float] = []
    for state, record in tail:
        times.append(record.t)
        energies.append(record.energy)
        if detector.update(state, record):
            logger.info("Equilibrium detected", step=state.step, t=state.t)
            return equilibrium_report(state, record, True, (times, energies))
    return None
