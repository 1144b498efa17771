"""Fourier-Laplace symbol of the linearised system and its sector scans.

For constant data (beta, a, c, B) the symbol is

    m(lambda, xi) = lambda (1 - i(a|xi)) (1 - i(c|xi)) + (B xi|xi) (beta lambda + |xi|^2)
                  = lambda (z1(xi) + z2(lambda, xi))

and the parabolicity estimate asks for |m| >= C (|lambda| (1 + |xi|^2) + |xi|^4)
on a sector |arg lambda| < phi with phi > pi/2.
"""

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from chgsim.config import settings
from chgsim.core.exceptions import HypothesisViolation, NotFoundError, ValidationError
from chgsim.core.logger import logger
from chgsim.models import ReportRow, SymbolBlock, Verdict
from chgsim.services.coefficients.validators import hypothesis_h_epsilon

MODULUS_RANGE = (-3.0, 3.0)
STABILITY_TOL = 0.10
MIKHLIN_TOL = 0.05


class SymbolParams(BaseModel):
    """Constant coefficient data of the linearised problem."""

    model_config = ConfigDict(frozen=True)

    beta: float
    a: Tuple[float, ...]
    c: Tuple[float, ...]
    B: Tuple[Tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def B_matrix(self) -> np.ndarray:
        return np.asarray(self.B, dtype=float)

    @property
    def epsilon(self) -> float:
        return hypothesis_h_epsilon(self.beta, self.a, self.c, self.B_matrix)


def make_symbol_params(
    beta: float,
    a: Sequence[float],
    c: Sequence[float],
    B: Optional[Sequence[Sequence[float]]] = None,
    strict: bool = False,
) -> SymbolParams:
    """
    Build symbol parameters; B defaults to the identity.

    Args:
        strict: raise HypothesisViolation when the constitutive form is not positive
    """
    n = len(a)
    if len(c) != n:
        raise ValidationError("symbol a and c need the same dimension", {"a": list(a), "c": list(c)})
    if beta <= 0.0:
        raise ValidationError("symbol beta must be positive", {"beta": beta})
    matrix = np.eye(n) if B is None else np.asarray(B, dtype=float).reshape(n, n)
    params = SymbolParams(
        beta=float(beta),
        a=tuple(float(v) for v in a),
        c=tuple(float(v) for v in c),
        B=tuple(tuple(float(v) for v in row) for row in matrix),
    )
    if strict and params.epsilon <= 0.0:
        raise HypothesisViolation(params.epsilon)
    return params


PRESETS: Dict[str, Dict[str, object]] = {
    "identity": {"beta": 1.0, "a": (0.0, 0.0), "c": (0.0, 0.0), "B": None},
    "mild": {"beta": 1.0, "a": (0.3, 0.0), "c": (0.0, 0.2), "B": None},
    "skew": {"beta": 1.0, "a": (0.5, 0.5), "c": (-0.2, 0.3), "B": None},
    # B aligned with the scanned directions so the weakest one is sampled exactly
    "anisotropic": {"beta": 0.5, "a": (0.0, 0.0), "c": (0.0, 0.0), "B": ((2.0, 0.0), (0.0, 0.5))},
}


def preset(name: str) -> SymbolParams:
    if name not in PRESETS:
        raise NotFoundError("symbol preset", name, sorted(PRESETS))
    return make_symbol_params(**PRESETS[name])


def params_from_block(block: SymbolBlock) -> SymbolParams:
    if block.preset:
        return preset(block.preset)
    B = None
    if block.B is not None:
        n = len(block.a)
        if len(block.B) != n * n:
            raise ValidationError("symbol.B needs n*n entries", {"B": block.B})
        B = np.asarray(block.B).reshape(n, n)
    return make_symbol_params(block.beta, block.a, block.c, B)


# =====================================
# SAMPLE GRIDS
# =====================================


def _directions(n: int, count: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # Fibonacci points on the sphere
    k = np.arange(count) + 0.5
    polar = np.arccos(1.0 - 2.0 * k / count)
    azimuth = np.pi * (1.0 + np.sqrt(5.0)) * k
    return np.stack(
        [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)], axis=1
    )


@dataclass(frozen=True)
class SectorGrid:
    """Samples of lambda in the sector |arg lambda| < phi and of xi over directions and moduli."""

    phi: float
    n: int
    rays: int = field(default_factory=lambda: settings.SECTOR_RAYS)
    lambda_moduli: int = field(default_factory=lambda: settings.SECTOR_LAMBDA_MODULI)
    xi_directions: int = field(default_factory=lambda: settings.SECTOR_XI_DIRECTIONS)
    xi_moduli: int = field(default_factory=lambda: settings.SECTOR_XI_MODULI)

    def __post_init__(self) -> None:
        if self.rays > 1 and not (np.pi / 2.0 < self.phi < np.pi):
            raise ValidationError("sector half-angle must lie in (pi/2, pi)", {"phi": self.phi})

    @property
    def lambdas(self) -> np.ndarray:
        if self.rays == 1:
            args = np.array([0.0])
        else:
            # open sector: stay strictly inside |arg| < phi
            args = np.linspace(-self.phi, self.phi, self.rays) * (1.0 - 1e-9)
        moduli = np.logspace(*MODULUS_RANGE, self.lambda_moduli)
        return (moduli[None, :] * np.exp(1j * args[:, None])).ravel()

    @property
    def xis(self) -> np.ndarray:
        dirs = _directions(self.n, self.xi_directions)
        moduli = np.logspace(*MODULUS_RANGE, self.xi_moduli)
        return (moduli[:, None, None] * dirs[None, :, :]).reshape(-1, self.n)

    def refined(self) -> "SectorGrid":
        """Double every sampling axis."""
        return replace(
            self,
            rays=self.rays if self.rays == 1 else 2 * self.rays,
            lambda_moduli=2 * self.lambda_moduli,
            xi_directions=self.xi_directions if self.n == 1 else 2 * self.xi_directions,
            xi_moduli=2 * self.xi_moduli,
        )


def make_sector_grid(
    n: int,
    phi_fraction: Optional[float] = None,
    rays: Optional[int] = None,
    lambda_moduli: Optional[int] = None,
    xi_directions: Optional[int] = None,
    xi_moduli: Optional[int] = None,
) -> SectorGrid:
    """Sector grid with settings defaults; phi given as a fraction of pi."""
    return SectorGrid(
        phi=np.pi * (settings.SECTOR_PHI if phi_fraction is None else phi_fraction),
        n=n,
        rays=rays or settings.SECTOR_RAYS,
        lambda_moduli=lambda_moduli or settings.SECTOR_LAMBDA_MODULI,
        xi_directions=xi_directions or settings.SECTOR_XI_DIRECTIONS,
        xi_moduli=xi_moduli or settings.SECTOR_XI_MODULI,
    )


# =====================================
# SYMBOL
# =====================================


def _forms(p: SymbolParams, xi: np.ndarray):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    a_xi = xi @ np.asarray(p.a)
    c_xi = xi @ np.asarray(p.c)
    b_xi = np.einsum("ki,ij,kj->k", xi, p.B_matrix, xi)
    xi_sq = np.sum(xi ** 2, axis=1)
    return a_xi, c_xi, b_xi, xi_sq


def symbol_m(p: SymbolParams, lam, xi) -> np.ndarray:
    """m(lambda, xi) for every pair (lambda_i, xi_k); scalar inputs give a scalar."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    a_xi, c_xi, b_xi, xi_sq = _forms(p, xi)
    value = (
        lam_arr[:, None] * ((1.0 - 1j * a_xi) * (1.0 - 1j * c_xi))[None, :]
        + b_xi[None, :] * (p.beta * lam_arr[:, None] + xi_sq[None, :])
    )
    return value.item() if value.size == 1 else value


def z_parts(p: SymbolParams, lam, xi):
    """(z1, z2) with m = lambda (z1 + z2)."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    a_xi, c_xi, b_xi, xi_sq = _forms(p, xi)
    z1 = 1.0 - a_xi * c_xi + p.beta * b_xi - 1j * (a_xi + c_xi)
    # m / lambda carries (B xi|xi) |xi|^2 / lambda without a beta factor
    z2 = (b_xi * xi_sq)[None, :] / lam_arr[:, None]
    if z2.size == 1:
        return complex(z1[0]), complex(z2.item())
    return z1, z2


def majorant(lam, xi) -> np.ndarray:
    """|lambda| (1 + |xi|^2) + |xi|^4."""
    lam_abs = np.abs(np.atleast_1d(np.asarray(lam, dtype=complex)))
    xi_sq = np.sum(np.atleast_2d(np.asarray(xi, dtype=float)) ** 2, axis=1)
    return lam_abs[:, None] * (1.0 + xi_sq[None, :]) + xi_sq[None, :] ** 2


def eval_S_hat(p: SymbolParams, lam, xi):
    """S^(lambda, xi) = (lambda (1 + |xi|^2) + |xi|^4) / m(lambda, xi)."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    xi_arr = np.atleast_2d(np.asarray(xi, dtype=float))
    xi_sq = np.sum(xi_arr ** 2, axis=1)
    numerator = lam_arr[:, None] * (1.0 + xi_sq[None, :]) + xi_sq[None, :] ** 2
    value = numerator / np.atleast_2d(symbol_m(p, lam_arr, xi_arr))
    return value.item() if value.size == 1 else value


def angle_constant(phi1: float, phi2: float) -> float:
    """C = min(1, sqrt(1 + cos(phi1 - phi2))) / sqrt(2)."""
    return float(min(1.0, np.sqrt(max(0.0, 1.0 + np.cos(phi1 - phi2)))) / np.sqrt(2.0))


# =====================================
# SCANS
# =====================================


@dataclass
class ScanResult:
    """Extremum of a scan with the location where it is attained."""

    value: float
    location: Dict[str, object] = field(default_factory=dict)
    refined_value: Optional[float] = None
    passed: Optional[bool] = None

    def where(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.location.items())


def _location(lam: complex, xi: np.ndarray) -> Dict[str, object]:
    return {
        "lambda": f"{lam.real:.6g}{lam.imag:+.6g}j",
        "xi": "[" + ",".join(f"{v:.6g}" for v in xi) + "]",
    }


def sector_sigma(p: SymbolParams, xis: np.ndarray) -> ScanResult:
    """sigma = max |arg z1(xi)|; passes when sigma < pi/2."""
    z1, _ = z_parts(p, 1.0, xis)
    args = np.abs(np.angle(np.atleast_1d(z1)))
    k = int(np.argmax(args))
    sigma = float(args[k])
    return ScanResult(
        value=sigma,
        location={"xi": "[" + ",".join(f"{v:.6g}" for v in np.atleast_2d(xis)[k]) + "]",
                  "margin": f"{np.pi / 2.0 - sigma:.6g}"},
        passed=sigma < np.pi / 2.0,
    )


def _ratio_extremum(p: SymbolParams, grid: SectorGrid, largest: bool) -> ScanResult:
    lam, xis = grid.lambdas, grid.xis
    ratio = np.abs(symbol_m(p, lam, xis)) / majorant(lam, xis)
    flat = int(np.argmax(ratio) if largest else np.argmin(ratio))
    i, k = np.unravel_index(flat, ratio.shape)
    return ScanResult(value=float(ratio[i, k]), location=_location(lam[i], xis[k]))


def lower_bound_scan(p: SymbolParams, grid: SectorGrid, check_refinement: bool = True) -> ScanResult:
    """
    c_min = min |m| / (|lambda| (1 + |xi|^2) + |xi|^4) over the grid.

    Passes when c_min > 0 and doubling every grid axis changes it by less than 10%.
    """
    result = _ratio_extremum(p, grid, largest=False)
    if not check_refinement:
        result.passed = result.value > 0.0
        return result
    refined = _ratio_extremum(p, grid.refined(), largest=False)
    result.refined_value = refined.value
    change = abs(refined.value - result.value) / max(abs(result.value), np.finfo(float).tiny)
    result.passed = result.value > 0.0 and change < STABILITY_TOL
    logger.debug("Lower bound scan", c_min=result.value, refined=refined.value, change=change)
    return result


def upper_bound_scan(p: SymbolParams, grid: SectorGrid) -> ScanResult:
    """C_hi = max |m| / majorant over the grid."""
    result = _ratio_extremum(p, grid, largest=True)
    result.passed = bool(np.isfinite(result.value))
    return result


def zero_set_min(p: SymbolParams, grid: SectorGrid) -> ScanResult:
    """min |m| over the grid; zero only at the excluded origin."""
    lam, xis = grid.lambdas, grid.xis
    values = np.abs(symbol_m(p, lam, xis))
    i, k = np.unravel_index(int(np.argmin(values)), values.shape)
    return ScanResult(value=float(values[i, k]), location=_location(lam[i], xis[k]),
                      passed=bool(values[i, k] > 0.0))


def max_sector_angle(
    p: SymbolParams,
    grid: SectorGrid,
    floor: float = 1e-6,
    iterations: int = 30,
) -> Tuple[float, float]:
    """
    Largest sampled half-angle in (pi/2, pi) keeping the lower-bound scan above ``floor``.

    Returns:
        (bisection angle, analytic companion pi - sigma)
    """
    sigma = sector_sigma(p, grid.xis).value
    lo, hi = np.pi / 2.0, np.pi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        trial = replace(grid, phi=mid)
        if lower_bound_scan(p, trial, check_refinement=False).value > floor:
            lo = mid
        else:
            hi = mid
    return float(lo), float(np.pi - sigma)


# =====================================
# MIKHLIN CONDITION
# =====================================


def multi_indices(n: int, max_order: int = 2) -> List[Tuple[int, ...]]:
    return sorted(
        (alpha for alpha in product(range(max_order + 1), repeat=n) if sum(alpha) <= max_order),
        key=lambda alpha: (sum(alpha), tuple(-x for x in alpha)),
    )


def _derivative(p: SymbolParams, lam: np.ndarray, xis: np.ndarray, alpha: Tuple[int, ...],
                step: np.ndarray) -> np.ndarray:
    """Centred-difference estimate of d^alpha S^ / d xi^alpha, shape (len(lam), len(xis))."""
    n = xis.shape[1]
    order = sum(alpha)
    h_row = step[None, :]

    def shifted(offsets: Sequence[Tuple[int, float]]) -> np.ndarray:
        moved = xis.copy()
        for axis, sign in offsets:
            moved[:, axis] = moved[:, axis] + sign * step
        return np.atleast_2d(eval_S_hat(p, lam, moved)).reshape(len(lam), len(xis))

    if order == 0:
        return shifted([])
    axes = [i for i in range(n) for _ in range(alpha[i])]
    if order == 1:
        i = axes[0]
        return (shifted([(i, 1.0)]) - shifted([(i, -1.0)])) / (2.0 * h_row)
    i, j = axes
    if i == j:
        return (shifted([(i, 1.0)]) - 2.0 * shifted([]) + shifted([(i, -1.0)])) / h_row ** 2
    return (
        shifted([(i, 1.0), (j, 1.0)]) - shifted([(i, 1.0), (j, -1.0)])
        - shifted([(i, -1.0), (j, 1.0)]) + shifted([(i, -1.0), (j, -1.0)])
    ) / (4.0 * h_row ** 2)


@dataclass
class MikhlinTable:
    """sup |xi|^|alpha| |d^alpha S^| per multi-index and per lambda."""

    alphas: List[Tuple[int, ...]]
    lambdas: np.ndarray
    sup: np.ndarray
    per_lambda: np.ndarray
    worst_change: float
    stable: bool

    @property
    def passed(self) -> bool:
        return self.stable and bool(np.all(np.isfinite(self.sup)))


def mikhlin_scan(
    p: SymbolParams,
    grid: SectorGrid,
    max_order: int = 2,
    step_factor: Optional[float] = None,
) -> MikhlinTable:
    """
    Finite-difference Mikhlin scan for n <= 2 and |alpha| <= max_order.

    The step is step_factor * (1 + |xi|); the table is recomputed with half the
    step and entries changing by 5% or more mark the scan unstable.
    """
    if p.n > 2:
        raise ValidationError("Mikhlin scan is limited to n <= 2", {"n": p.n})
    step_factor = settings.MIKHLIN_STEP if step_factor is None else step_factor
    lam, xis = grid.lambdas, grid.xis
    xi_norm = np.linalg.norm(xis, axis=1)
    alphas = multi_indices(p.n, max_order)

    tables = []
    for factor in (step_factor, 0.5 * step_factor):
        step = factor * (1.0 + xi_norm)
        rows = []
        for alpha in alphas:
            weighted = xi_norm[None, :] ** sum(alpha) * np.abs(_derivative(p, lam, xis, alpha, step))
            rows.append(np.max(weighted, axis=1))
        tables.append(np.array(rows))

    coarse, fine = tables
    diff = np.abs(coarse - fine)
    scale = np.maximum(np.abs(coarse), np.abs(fine))
    unstable = diff > MIKHLIN_TOL * scale + 1e-6
    worst = float(np.max(diff / np.maximum(scale, 1e-12)))
    table = MikhlinTable(
        alphas=alphas,
        lambdas=lam,
        sup=np.max(coarse, axis=1),
        per_lambda=coarse,
        worst_change=worst,
        stable=not bool(np.any(unstable)),
    )
    if not table.stable:
        logger.warning("Mikhlin scan unstable under step halving", worst_change=worst)
    return table


# =====================================
# REPORT
# =====================================


def _verdict(ok: Optional[bool]) -> Verdict:
    if ok is None:
        return Verdict.INFO
    return Verdict.PASS if ok else Verdict.FAIL


def symbol_report(
    p: SymbolParams,
    grid: SectorGrid,
    mikhlin: bool = True,
    max_angle: bool = True,
) -> List[ReportRow]:
    """Run every scan and collect report rows."""
    rows = []
    epsilon = p.epsilon
    rows.append(ReportRow(scan="hypothesis", quantity="epsilon", value=epsilon,
                          verdict=_verdict(epsilon > 0.0)))

    sigma = sector_sigma(p, grid.xis)
    rows.append(ReportRow(scan="sector", quantity="sigma", value=sigma.value,
                          location=sigma.where(), verdict=_verdict(sigma.passed)))

    lower = lower_bound_scan(p, grid)
    rows.append(ReportRow(scan="lower_bound", quantity="c_min", value=lower.value,
                          location=lower.where(), verdict=_verdict(lower.passed)))
    rows.append(ReportRow(scan="lower_bound", quantity="c_min_refined",
                          value=float(lower.refined_value), verdict=Verdict.INFO))

    upper = upper_bound_scan(p, grid)
    rows.append(ReportRow(scan="upper_bound", quantity="c_hi", value=upper.value,
                          location=upper.where(), verdict=_verdict(upper.passed)))

    zero = zero_set_min(p, grid)
    rows.append(ReportRow(scan="zero_set", quantity="min_abs_m", value=zero.value,
                          location=zero.where(), verdict=_verdict(zero.passed)))

    if max_angle:
        angle, companion = max_sector_angle(p, grid)
        rows.append(ReportRow(scan="sector", quantity="max_phi", value=angle, verdict=Verdict.INFO))
        rows.append(ReportRow(scan="sector", quantity="pi_minus_sigma", value=companion,
                              verdict=Verdict.INFO))

    if mikhlin and p.n <= 2:
        table = mikhlin_scan(p, grid)
        for alpha, value in zip(table.alphas, table.sup):
            rows.append(ReportRow(
                scan="mikhlin",
                quantity="alpha=" + "".join(str(x) for x in alpha),
                value=float(value),
                location=f"worst_change={table.worst_change:.3g}",
                verdict=_verdict(table.passed),
            ))

    logger.info(
        "Symbol scan completed",
        c_min=lower.value,
        sigma=sigma.value,
        failures=sum(1 for row in rows if row.verdict == Verdict.FAIL),
    )
    return rows
