"""Physical potentials, the stabilized linearisation and growth certificates."""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict

from chgsim.core.exceptions import ValidationError
from chgsim.core.logger import logger
from chgsim.models import GrowthReport, PotentialBlock, PotentialKind, ReportRow, Verdict

ArrayLike = Union[float, np.ndarray]

STABILIZATION_WINDOW = 1.5
SCAN_POINTS = 4001


class PotentialSpec(BaseModel):
    """A polynomial potential with its stabilization constant."""

    model_config = ConfigDict(frozen=True)

    kind: PotentialKind
    coeffs: Tuple[float, ...]
    stabilization: float
    scan_range: float = 10.0
    eta: Optional[float] = None

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coeffs)

    @property
    def degree(self) -> int:
        return int(self.polynomial.trim().degree())

    def phi(self, s: ArrayLike) -> ArrayLike:
        return self.polynomial(s)

    def dphi(self, s: ArrayLike) -> ArrayLike:
        return self.polynomial.deriv(1)(s)

    def d2phi(self, s: ArrayLike) -> ArrayLike:
        return self.polynomial.deriv(2)(s)

    def d3phi(self, s: ArrayLike) -> ArrayLike:
        return self.polynomial.deriv(3)(s)

    @property
    def analytic(self) -> bool:
        # every built-in kind is a polynomial
        return True


def _quartic_coeffs(alpha: float, kappa: float, xi: float, offset: float = 0.0) -> Tuple[float, ...]:
    return (offset, xi, 0.5 * kappa, 0.0, 0.25 * alpha)


def default_stabilization(coeffs: Sequence[float], scan_range: float = 10.0) -> float:
    """max(0, max of the second derivative over the scan range clipped to [-1.5, 1.5])."""
    bound = min(scan_range, STABILIZATION_WINDOW)
    s = np.linspace(-bound, bound, SCAN_POINTS)
    return float(max(0.0, np.max(Polynomial(coeffs).deriv(2)(s))))


def make_potential(
    kind: Union[PotentialKind, str] = PotentialKind.DOUBLE_WELL,
    coeffs: Optional[Sequence[float]] = None,
    alpha: float = 1.0,
    kappa: float = -1.0,
    xi: float = 0.0,
    stabilization: Optional[float] = None,
    scan_range: float = 10.0,
    eta: Optional[float] = None,
) -> PotentialSpec:
    """
    Build a potential.

    Args:
        kind: double_well, quartic_general or polynomial
        coeffs: ascending coefficients (polynomial kind)
        alpha, kappa, xi: quartic (alpha/4) s^4 + (kappa/2) s^2 + xi s, alpha > 0
        stabilization: S; None selects the default from the second derivative
        scan_range: half-width R of the certificate scan
        eta: user constant of the lower growth bound

    Returns:
        PotentialSpec
    """
    kind = PotentialKind(kind)
    if kind == PotentialKind.DOUBLE_WELL:
        values = _quartic_coeffs(1.0, -1.0, 0.0, offset=0.25)
    elif kind == PotentialKind.QUARTIC_GENERAL:
        if alpha <= 0.0:
            raise ValidationError("quartic_general needs alpha > 0", {"alpha": alpha})
        values = _quartic_coeffs(alpha, kappa, xi)
    else:
        if not coeffs:
            raise ValidationError("polynomial potential needs coefficients")
        values = tuple(float(v) for v in coeffs)

    if stabilization is None:
        stabilization = default_stabilization(values, scan_range)
    elif stabilization < 0.0:
        raise ValidationError("stabilization must be nonnegative", {"stabilization": stabilization})

    return PotentialSpec(
        kind=kind,
        coeffs=tuple(values),
        stabilization=float(stabilization),
        scan_range=float(scan_range),
        eta=eta,
    )


def potential_from_block(block: PotentialBlock) -> PotentialSpec:
    return make_potential(
        kind=block.kind,
        coeffs=block.coeffs,
        alpha=block.alpha,
        kappa=block.kappa,
        xi=block.xi,
        stabilization=block.stabilization,
        scan_range=block.scan_range,
        eta=block.eta,
    )


def evaluate(spec: PotentialSpec, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike, ArrayLike]:
    """(Phi, Phi', Phi'', Phi''') at s."""
    return spec.phi(s), spec.dphi(s), spec.d2phi(s), spec.d3phi(s)


def split_linearized(spec: PotentialSpec, s_old: ArrayLike) -> Tuple[ArrayLike, float]:
    """Value Phi'(s_old) and slope S of the linearisation Phi'(s_old) + S (s_new - s_old)."""
    return spec.dphi(s_old), spec.stabilization


def shifted(spec: PotentialSpec, c: float) -> PotentialSpec:
    """Phi~(s) = Phi(s + c); the stabilization constant is kept."""
    shifted_poly = Polynomial(spec.coeffs)(Polynomial([c, 1.0]))
    return spec.model_copy(update={
        "kind": PotentialKind.POLYNOMIAL,
        "coeffs": tuple(float(v) for v in shifted_poly.coef),
    })


# =====================================
# GROWTH CERTIFICATES
# =====================================


def _required_eta(poly: Polynomial) -> float:
    """Smallest eta with Phi(s) >= -(eta/2) s^2 - c0 for some c0, by degree."""
    coef = poly.trim().coef
    deg = len(coef) - 1
    if deg >= 3:
        if deg % 2 == 1 or coef[-1] <= 0.0:
            return np.inf
        return 0.0
    if deg == 2:
        a2, a1 = coef[2], coef[1]
        required = max(0.0, -2.0 * a2)
        if a2 + 0.5 * required == 0.0 and a1 != 0.0:
            # linear term left unbounded at equality
            required = np.nextafter(required, np.inf)
        return required
    return 0.0


def _worst(ratio: np.ndarray, s: np.ndarray) -> Tuple[float, float]:
    idx = int(np.argmax(ratio))
    return float(ratio[idx]), float(s[idx])


def validate_growth(
    spec: PotentialSpec,
    scan_range: Optional[float] = None,
    n: int = 3,
    eta: Optional[float] = None,
    lambda1: Optional[float] = None,
) -> GrowthReport:
    """
    Certify the four growth conditions on a finite scan plus degree bookkeeping.

    Args:
        spec: potential
        scan_range: half-width R of the scan (defaults to spec.scan_range)
        n: space dimension the exponent limits refer to
        eta: user eta for the lower bound (defaults to spec.eta, then the smallest admissible)
        lambda1: first nontrivial Neumann eigenvalue of the run's grid

    Returns:
        GrowthReport with one row per condition and the fitted constants
    """
    R = float(scan_range if scan_range is not None else spec.scan_range)
    s = np.linspace(-R, R, SCAN_POINTS)
    poly = spec.polynomial.trim()
    deg = max(int(poly.degree()), 0)
    phi, dphi, d2phi, d3phi = evaluate(spec, s)
    rows = []
    witnesses = {}

    # lower bound Phi >= -(eta/2) s^2 - c0
    eta_required = _required_eta(poly)
    if eta is None:
        eta = spec.eta
    if eta is None:
        eta = eta_required if np.isfinite(eta_required) else 0.0
    gap = -phi - 0.5 * eta * s ** 2
    c0, witnesses["lower_bound"] = _worst(gap, s)
    c0 = max(c0, 0.0)
    lower_ok = bool(np.isfinite(eta_required) and eta >= eta_required)
    rows.append(ReportRow(scan="growth", quantity="eta", value=eta,
                          location=f"s={witnesses['lower_bound']:.6g}",
                          verdict=Verdict.PASS if lower_ok else Verdict.FAIL))
    rows.append(ReportRow(scan="growth", quantity="c0", value=c0, verdict=Verdict.INFO))
    if lambda1 is not None:
        rows.append(ReportRow(scan="growth", quantity="eta_below_lambda1", value=lambda1 - eta,
                              verdict=Verdict.PASS if eta < lambda1 else Verdict.FAIL))

    # |Phi'| <= (c1 Phi + c2 s^2 + c3)^theta
    theta = max((deg - 1) / deg, 0.5) if deg >= 1 else 0.5
    base = phi + (eta + 1.0) * s ** 2 + c0 + 1.0
    scale_ratio = np.abs(dphi) / np.power(np.maximum(base, 1e-300), theta)
    k, witnesses["derivative_bound"] = _worst(scale_ratio, s)
    k = max(k, 1.0)
    factor = k ** (1.0 / theta)
    c1, c2, c3 = factor, factor * (eta + 1.0), factor * (c0 + 1.0)
    theta_ok = lower_ok and 0.0 < theta < 1.0 and bool(np.all(base > 0.0))
    rows.append(ReportRow(scan="growth", quantity="theta", value=theta,
                          location=f"s={witnesses['derivative_bound']:.6g}",
                          verdict=Verdict.PASS if theta_ok else Verdict.FAIL))

    # |Phi''| <= C (1 + |s|^alpha), |Phi'''| <= C (1 + |s|^gamma)
    alpha = float(max(deg - 2, 1))
    gamma = float(max(deg - 3, 1))
    c_alpha, witnesses["second_derivative"] = _worst(np.abs(d2phi) / (1.0 + np.abs(s) ** alpha), s)
    c_gamma, witnesses["third_derivative"] = _worst(np.abs(d3phi) / (1.0 + np.abs(s) ** gamma), s)
    alpha_ok = n != 3 or alpha < 4.0
    gamma_ok = n != 3 or gamma < 3.0
    rows.append(ReportRow(scan="growth", quantity="alpha", value=alpha,
                          location=f"C={c_alpha:.6g}",
                          verdict=Verdict.PASS if alpha_ok else Verdict.FAIL))
    rows.append(ReportRow(scan="growth", quantity="gamma", value=gamma,
                          location=f"C={c_gamma:.6g}",
                          verdict=Verdict.PASS if gamma_ok else Verdict.FAIL))
    rows.append(ReportRow(scan="growth", quantity="analytic", value=1.0 if spec.analytic else 0.0,
                          verdict=Verdict.INFO))

    report = GrowthReport(
        scan_range=R,
        dimension=n,
        degree=deg,
        eta=float(eta),
        eta_required=float(eta_required),
        c0=c0,
        theta=theta,
        c1=c1,
        c2=c2,
        c3=c3,
        alpha=alpha,
        gamma=gamma,
        lambda1=lambda1,
        analytic=spec.analytic,
        witnesses=witnesses,
        rows=rows,
    )
    logger.info(
        "Growth certificate computed",
        degree=deg,
        alpha=alpha,
        gamma=gamma,
        theta=theta,
        passed=report.passed,
    )
    return report


def energy_lower_bound(report: GrowthReport, psi_norm_sq: float, volume: float) -> float:
    """-(eta/2) |psi|^2 - c0 |Omega|."""
    return -0.5 * report.eta * psi_norm_sq - report.c0 * volume
