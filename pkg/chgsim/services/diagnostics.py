"""Discrete energy, mass and chemical-potential ledgers of a trajectory."""

from typing import TYPE_CHECKING, Dict, Optional, Sequence

import numpy as np

from chgsim.models import DiagnosticsRecord, GrowthReport
from chgsim.services.coefficients import CoefficientSet
from chgsim.services.grid import (
    CellField,
    FaceField,
    boundary_integral,
    boundary_pairing,
    face_average,
    gradient,
    inner,
    integrate,
    laplacian,
    norm,
)
from chgsim.services.potential import PotentialSpec, energy_lower_bound
from chgsim.services.sources import SourceData

if TYPE_CHECKING:
    from chgsim.services.solver import SolverState

DISSIPATION_SLACK = 10.0
DISSIPATION_FLOOR = 1e-12


def energy(psi: CellField, potential: PotentialSpec) -> float:
    """E(psi) = 1/2 |grad psi|^2 + int Phi(psi)."""
    grad = gradient(psi)
    return 0.5 * inner(grad, grad) + integrate(CellField(psi.grid, potential.phi(psi.values)))


def mass(psi: CellField) -> float:
    return integrate(psi)


def mean_mu(mu: CellField) -> float:
    return integrate(mu) / mu.grid.domain_volume


def stationary_residual(psi: CellField, potential: PotentialSpec) -> float:
    """L2 norm of -lap psi + Phi'(psi) minus its mean."""
    dphi = potential.dphi(psi.values)
    r = -laplacian(psi).values + dphi - integrate(CellField(psi.grid, dphi)) / psi.grid.domain_volume
    field = CellField(psi.grid, r)
    return float(np.sqrt(max(inner(field, field), 0.0)))


def _weighted(components, field: FaceField) -> FaceField:
    return FaceField(field.grid, tuple(w * comp for w, comp in zip(components, field.components)))


def energy_terms(
    old: "SolverState",
    new: "SolverState",
    tau: float,
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: SourceData,
) -> Dict[str, float]:
    """
    Every term of the discrete energy balance for the step old -> new.

    dE_dt + diss_beta + diss_cross + diss_mobility + numerical = supply + remainder

    The remainder is the Taylor defect of the potential between the two levels:
    zero when Phi is zero and first order in tau otherwise. It is what the
    residual measures, and is also returned on its own.
    """
    grid = new.grid
    v = new.dpsi_dt
    mu = new.mu
    frozen = new.frozen
    grad_mu = gradient(mu)
    grad_v = gradient(v)

    e_old = energy(old.psi, potential)
    e_new = energy(new.psi, potential)
    dE_dt = (e_new - e_old) / tau
    diss_beta = coeffs.beta * inner(v, v)
    diss_cross = (inner(_weighted(frozen.a_faces, face_average(v)), grad_mu)
                  - inner(_weighted(frozen.c_faces, face_average(mu)), grad_v))
    diss_mobility = inner(_weighted(frozen.b_faces, grad_mu), grad_mu)

    dphi_old = potential.dphi(old.psi.values)
    numerical = 0.5 * tau * inner(grad_v, grad_v) + inner(CellField(grid, new.phi_lin - dphi_old), v)

    phi_jump = integrate(CellField(grid, potential.phi(new.psi.values) - potential.phi(old.psi.values)))
    remainder = phi_jump / tau - inner(CellField(grid, dphi_old), v)

    f = CellField(grid, data.f.values(grid, new.t))
    g = CellField(grid, data.g.values(grid, new.t))
    supply = (inner(f, mu) + boundary_pairing(data.h1.field(grid, new.t), mu)
              + boundary_pairing(data.h2.field(grid, new.t), v) - inner(g, v))

    balance = dE_dt + diss_beta + diss_cross + diss_mobility + numerical - supply
    return {
        "energy": e_new,
        "dE_dt": dE_dt,
        "diss_beta": diss_beta,
        "diss_cross": diss_cross,
        "diss_mobility": diss_mobility,
        "numerical_dissipation": numerical,
        "supply": supply,
        "remainder": remainder,
        "residual": abs(balance),
    }


def energy_identity_residual(
    old: "SolverState",
    new: "SolverState",
    tau: float,
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: Optional[SourceData] = None,
) -> float:
    """|dE/dt + dissipation - supply| with dissipation including the scheme's own; O(tau) unless Phi = 0."""
    return energy_terms(old, new, tau, coeffs, potential, data or SourceData.zero())["residual"]


def mean_mu_identity_residual(
    state: "SolverState",
    coeffs: CoefficientSet,
    data: Optional[SourceData] = None,
) -> float:
    """
    |int mu - int Phi'_lin - int g - beta (int f + oint h1) + oint h2|.

    The beta term uses the data at the state's time and is dropped at t = 0,
    where d psi / dt = 0.
    """
    data = data or SourceData.zero()
    grid = state.grid
    t = state.t
    value = (integrate(state.mu) - integrate(CellField(grid, state.phi_lin))
             - integrate(CellField(grid, data.g.values(grid, t)))
             + boundary_integral(data.h2.field(grid, t)))
    if state.step > 0:
        value -= coeffs.beta * source_rate(state, data)
    return abs(value)


def source_rate(state: "SolverState", data: SourceData) -> float:
    """int f + oint h1 at the state's time."""
    grid = state.grid
    return integrate(CellField(grid, data.f.values(grid, state.t))) + boundary_integral(
        data.h1.field(grid, state.t)
    )


def mass_balance_residual(trajectory: Sequence["SolverState"], data: Optional[SourceData] = None) -> float:
    """|int psi(T) - int psi(0) - sum tau (int f + oint h1)| along consecutive states."""
    data = data or SourceData.zero()
    if not trajectory:
        return 0.0
    supplied = 0.0
    for prev, cur in zip(trajectory[:-1], trajectory[1:]):
        supplied += (cur.t - prev.t) * source_rate(cur, data)
    return abs(mass(trajectory[-1].psi) - mass(trajectory[0].psi) - supplied)


def dissipation_check(
    dE_dt: float,
    rate_psi: float,
    rate_mu: float,
    epsilon: Optional[float],
    residual: float,
    homogeneous: bool,
) -> Optional[bool]:
    """
    dE/dt <= -epsilon (|v|^2 + |grad mu|^2), up to the identity residual.

    Returns None when the data are not homogeneous or epsilon is unknown.
    """
    if not homogeneous or epsilon is None:
        return None
    bound = -epsilon * (rate_psi ** 2 + rate_mu ** 2)
    return bool(dE_dt <= bound + DISSIPATION_SLACK * residual + DISSIPATION_FLOOR)


def initial_record(
    state: "SolverState",
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: Optional[SourceData] = None,
    growth: Optional[GrowthReport] = None,
) -> DiagnosticsRecord:
    """Row for t = 0."""
    data = data or SourceData.zero()
    e0 = energy(state.psi, potential)
    return DiagnosticsRecord(
        step=state.step,
        t=state.t,
        mass=mass(state.psi),
        energy=e0,
        mean_mu=mean_mu(state.mu),
        mean_mu_residual=mean_mu_identity_residual(state, coeffs, data),
        stationary_residual=stationary_residual(state.psi, potential),
        rate_mu=norm(gradient(state.mu)),
        energy_lower_margin=_lower_margin(state, e0, growth),
    )


def _lower_margin(state: "SolverState", e: float, growth: Optional[GrowthReport]) -> Optional[float]:
    if growth is None:
        return None
    return e - energy_lower_bound(growth, inner(state.psi, state.psi), state.grid.domain_volume)


def build_record(
    old: "SolverState",
    new: "SolverState",
    tau: float,
    coeffs: CoefficientSet,
    potential: PotentialSpec,
    data: Optional[SourceData] = None,
    growth: Optional[GrowthReport] = None,
    epsilon: Optional[float] = None,
    coefficients_ok: Optional[bool] = None,
) -> DiagnosticsRecord:
    """
    Diagnostics row for the step old -> new.

    ``epsilon`` is the margin in force for the step (``coeffs.epsilon`` when
    omitted); the dissipation check is skipped unless it is positive.
    """
    data = data or SourceData.zero()
    epsilon = coeffs.epsilon if epsilon is None else epsilon
    certified = epsilon if epsilon is not None and epsilon > 0.0 else None
    terms = energy_terms(old, new, tau, coeffs, potential, data)
    rate_psi = norm(new.dpsi_dt)
    rate_mu = norm(gradient(new.mu))
    return DiagnosticsRecord(
        step=new.step,
        t=new.t,
        mass=mass(new.psi),
        energy=terms["energy"],
        dE_dt=terms["dE_dt"],
        diss_beta=terms["diss_beta"],
        diss_cross=terms["diss_cross"],
        diss_mobility=terms["diss_mobility"],
        mean_mu=mean_mu(new.mu),
        mean_mu_residual=mean_mu_identity_residual(new, coeffs, data),
        energy_identity_residual=terms["residual"],
        stationary_residual=stationary_residual(new.psi, potential),
        mass_balance_residual=abs(mass(new.psi) - new.mass0 - new.source_mass),
        rate_psi=rate_psi,
        rate_mu=rate_mu,
        numerical_dissipation=terms["numerical_dissipation"],
        potential_remainder=terms["remainder"],
        epsilon=epsilon,
        coefficients_ok=coefficients_ok,
        energy_lower_margin=_lower_margin(new, terms["energy"], growth),
        dissipation_ok=dissipation_check(
            terms["dE_dt"], rate_psi, rate_mu, certified, terms["residual"], data.homogeneous
        ),
        max_update=float(np.max(np.abs(new.psi.values - old.psi.values))),
    )
