"""Structural checks on the constitutive coefficients."""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from chgsim.config import settings
from chgsim.core.exceptions import HypothesisViolation
from chgsim.core.logger import logger
from chgsim.models import CoefficientReport, ReportRow, Verdict
from chgsim.services.coefficients.base import CoefficientSet, VectorField
from chgsim.services.grid import CellField, GridSpec, divergence


def _form_matrix(beta: float, a: Sequence[float], c: Sequence[float], B: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = a.shape[0]
    d = 0.5 * (a + c)
    M = np.empty((n + 1, n + 1))
    M[0, 0] = beta
    M[0, 1:] = d
    M[1:, 0] = d
    M[1:, 1:] = 0.5 * (B + B.T)
    return M


def hypothesis_h_epsilon(beta: float, a: Sequence[float], c: Sequence[float], B: np.ndarray) -> float:
    """
    Largest epsilon for which the constitutive quadratic form
    beta z0^2 + (a + c | z1) z0 + (B z1 | z1) dominates epsilon (z0^2 + |z1|^2).

    A negative value means the hypothesis fails at this point.
    """
    return float(np.linalg.eigvalsh(_form_matrix(beta, a, c, B))[0])


def hypothesis_h_epsilon_field(
    beta: float,
    d: np.ndarray,
    b: np.ndarray,
) -> np.ndarray:
    """
    Pointwise epsilon for B = bI in closed form.

    Args:
        beta: kinetic modulus
        d: a + c sampled at points, shape (n, *points)
        b: mobility at the same points

    Returns:
        Array of epsilon values of the points' shape
    """
    n = d.shape[0]
    d_sq = np.sum(d ** 2, axis=0)
    eps = 0.5 * (beta + b) - np.sqrt((0.5 * (beta - b)) ** 2 + 0.25 * d_sq)
    if n >= 2:
        # eigenvalue b on the complement of a + c
        eps = np.minimum(eps, b)
    return eps


def check_ha(
    beta: float,
    a: Sequence[float],
    c: Sequence[float],
    B: np.ndarray,
    epsilon: float,
) -> Tuple[bool, float]:
    """
    Check the matrix inequality implied by the hypothesis:
    beta B - (a (x) c + c (x) a) / 2 >= epsilon beta.

    Returns:
        (verdict, margin) with margin = lambda_min(sym(beta B - (a(x)c + c(x)a)/2)) - epsilon beta
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    outer = 0.5 * (np.outer(a, c) + np.outer(c, a))
    sym = 0.5 * (beta * (B + B.T)) - outer
    margin = float(np.linalg.eigvalsh(sym)[0] - epsilon * beta)
    return margin >= -1e-10, margin


def _sample_sets(coeffs: CoefficientSet, grid: GridSpec, psi: Optional[CellField]):
    """(points, d, b) triples at cell centres and at face centres of every axis."""
    sets = [(grid.cell_centers(), coeffs.a.on_cells(grid, psi) + coeffs.c.on_cells(grid, psi),
             coeffs.b.on_cells(grid, psi))]
    a_faces = coeffs.a.on_faces(grid, psi)
    c_faces = coeffs.c.on_faces(grid, psi)
    b_faces = coeffs.b.on_faces(grid, psi)
    for axis in range(grid.dimension):
        sets.append((grid.face_centers(axis), a_faces[axis] + c_faces[axis], b_faces[axis]))
    return sets


def field_epsilon(
    coeffs: CoefficientSet,
    grid: GridSpec,
    psi: Optional[CellField] = None,
    strict: bool = True,
) -> Tuple[float, List[float]]:
    """
    Minimum of the pointwise epsilon over all cell and face sample points.

    The result is stored into ``coeffs.epsilon`` when positive; otherwise
    ``coeffs.epsilon`` is cleared so no stale margin survives.

    Args:
        coeffs: coefficient set (state-dependent fields frozen at ``psi``)
        grid: mesh supplying the sample points
        psi: state for quasilinear coefficients
        strict: raise HypothesisViolation when the minimum is not positive

    Returns:
        (epsilon, location of the minimum)
    """
    best = np.inf
    location: List[float] = []
    for points, d, b in _sample_sets(coeffs, grid, psi):
        eps = hypothesis_h_epsilon_field(coeffs.beta, d, b)
        idx = np.unravel_index(int(np.argmin(eps)), eps.shape)
        if eps[idx] < best:
            best = float(eps[idx])
            location = [float(p[idx]) for p in points]

    logger.debug("Computed field epsilon", epsilon=best, location=location)
    if best > 0.0:
        coeffs.epsilon = best
        return best, location
    coeffs.epsilon = None
    if strict:
        raise HypothesisViolation(best, location)
    return best, location


def check_divergence_free(vf: VectorField, grid: GridSpec, psi: Optional[CellField] = None) -> float:
    """Max-norm of the discrete divergence of the assembled face-normal samples."""
    return float(np.max(np.abs(divergence(vf.face_normals(grid, psi)).values)))


def check_tangency(vf: VectorField, grid: GridSpec, psi: Optional[CellField] = None) -> float:
    """Max |(vf | nu)| over boundary faces."""
    normals = vf.face_normals(grid, psi)
    worst = 0.0
    for axis, comp in enumerate(normals.components):
        index = [slice(None)] * grid.dimension
        for end in (0, -1):
            index[axis] = end
            worst = max(worst, float(np.max(np.abs(comp[tuple(index)]))))
    return worst


def _verdict(ok: bool) -> Verdict:
    return Verdict.PASS if ok else Verdict.FAIL


def validate_coefficients(
    coeffs: CoefficientSet,
    grid: GridSpec,
    psi: Optional[CellField] = None,
    tol: Optional[float] = None,
) -> CoefficientReport:
    """
    Aggregate the ellipticity margin, divergence and tangency checks.

    Args:
        coeffs: coefficient set
        grid: mesh
        psi: state at which quasilinear coefficients are frozen
        tol: divergence/tangency tolerance (defaults to settings.VALIDATOR_TOL)

    Returns:
        CoefficientReport with one row per check
    """
    tol = settings.VALIDATOR_TOL if tol is None else tol
    epsilon, location = field_epsilon(coeffs, grid, psi, strict=False)
    where = " ".join(f"{x:.6g}" for x in location)
    rows = [
        ReportRow(scan="coefficients", quantity="beta", value=coeffs.beta,
                  verdict=_verdict(coeffs.beta > 0.0)),
        ReportRow(scan="coefficients", quantity="epsilon", value=epsilon, location=where,
                  verdict=_verdict(epsilon > 0.0)),
    ]
    for name, vf in (("a", coeffs.a), ("c", coeffs.c)):
        div = check_divergence_free(vf, grid, psi)
        tang = check_tangency(vf, grid, psi)
        rows.append(ReportRow(scan="coefficients", quantity=f"div_{name}", value=div,
                              verdict=_verdict(div <= tol)))
        rows.append(ReportRow(scan="coefficients", quantity=f"tangency_{name}", value=tang,
                              verdict=_verdict(tang <= tol)))

    report = CoefficientReport(epsilon=epsilon, epsilon_location=location, rows=rows)
    logger.info("Coefficient validation completed", epsilon=epsilon, passed=report.passed)
    return report
