"""Extension of coefficient fields from a ball to the whole space.

Vector fields use a Kelvin-type inversion corrected by a radial term so that
divergence-free data stay divergence-free; scalar fields use plain inversion
through the sphere |x| = r.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

from chgsim.config import settings
from chgsim.core.exceptions import QuadratureError, ValidationError
from chgsim.core.logger import logger
from chgsim.services.coefficients.base import CoefficientField

INSIDE_TOL = 1e-14
DIVERGENCE_FLOOR = 1e-8

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass
class BallFieldSample:
    """A field known on the closed ball of radius ``radius`` about the origin."""

    radius: float
    evaluator: Evaluator
    dimension: int = 2

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValidationError("ball radius must be positive", {"radius": self.radius})

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)


def ball_sample(
    field: CoefficientField,
    radius: float,
    dimension: int = 2,
    extents: Optional[Sequence[float]] = None,
) -> BallFieldSample:
    """Wrap a registry field as a ball sample evaluated pointwise."""
    extents = tuple(extents) if extents is not None else (1.0,) * dimension

    def evaluator(x: np.ndarray) -> np.ndarray:
        return field.evaluate([np.asarray(xi) for xi in x], extents)

    return BallFieldSample(radius=radius, evaluator=evaluator, dimension=dimension)


def _radial_integral(sample: BallFieldSample, xi: np.ndarray, r: float) -> float:
    """int_{r_k}^{r} s^(n-2) (a(r_k^2 xi / s) | xi) ds by adaptive Gauss-Kronrod quadrature."""
    rk, n = sample.radius, sample.dimension

    def integrand(s: float) -> float:
        return s ** (n - 2) * float(np.dot(sample(rk * rk * xi / s), xi))

    result = integrate.quad(
        integrand,
        rk,
        r,
        epsabs=settings.QUAD_TOL,
        epsrel=1e-13,
        limit=settings.QUAD_LIMIT,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise QuadratureError(float(abserr), settings.QUAD_TOL)
    return float(value)


def extend_divfree(sample: BallFieldSample, x: Sequence[float]) -> np.ndarray:
    """
    Extend a divergence-free vector field from the ball to the point x.

    Inside the ball the sample is returned unchanged. Outside, with r = |x|,
    xi = x / r and the inverted point y = r_k^2 x / r^2:

        a~(x) = a(y) - 2 (xi | a(y)) xi + R(r, xi) xi
        R(r, xi) = (r_k / r)^(n-1) 2 (a(r_k xi) | xi)
                   + 2 (n - 1) / r^(n-1) int_{r_k}^{r} s^(n-2) (a(r_k^2 xi / s) | xi) ds
    """
    x = np.asarray(x, dtype=float)
    n, rk = sample.dimension, sample.radius
    if n not in (2, 3) or x.shape != (n,):
        raise ValidationError("divergence-free extension needs n in {2, 3}", {"shape": list(x.shape)})
    r = float(np.linalg.norm(x))
    if r <= rk + INSIDE_TOL:
        return sample(x)

    xi = x / r
    a_y = sample(rk * rk * x / (r * r))
    boundary_term = (rk / r) ** (n - 1) * 2.0 * float(np.dot(sample(rk * xi), xi))
    radial = 2.0 * (n - 1) / r ** (n - 1) * _radial_integral(sample, xi, r)
    R = boundary_term + radial
    return a_y - 2.0 * float(np.dot(xi, a_y)) * xi + R * xi


def extend_reflect(sample: BallFieldSample, x: Sequence[float]) -> float:
    """b(x) inside the ball, b(r_k^2 x / |x|^2) outside."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r <= sample.radius + INSIDE_TOL:
        return float(sample(x))
    return float(sample(sample.radius ** 2 * x / (r * r)))


def query_points(radius: float, dimension: int, directions: int = 16, radii: int = 24) -> np.ndarray:
    """Points on rays through the origin: uniform radii inside the ball, log-spaced out to ten radii."""
    rs = np.concatenate([np.linspace(0.0, radius, radii // 2, endpoint=False),
                         np.logspace(np.log10(radius), np.log10(10.0 * radius), radii - radii // 2)])
    if dimension == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        k = np.arange(directions) + 0.5
        polar = np.arccos(1.0 - 2.0 * k / directions)
        azimuth = np.pi * (1.0 + np.sqrt(5.0)) * k
        dirs = np.stack([np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar),
                         np.cos(polar)], axis=1)
    return (rs[:, None, None] * dirs[None, :, :]).reshape(-1, dimension)


def deviation_bound(
    extended: Evaluator,
    base_value,
    radius: float,
    dimension: int = 2,
    directions: int = 16,
    radii: int = 24,
) -> float:
    """
    Supremum of |extended(x) - base_value| over a query grid.

    The grid covers the ball and log-spaced radii out to ten times its radius.
    """
    base = np.asarray(base_value, dtype=float)
    worst = 0.0
    for x in query_points(radius, dimension, directions, radii):
        worst = max(worst, float(np.linalg.norm(np.asarray(extended(x)) - base)))
    return worst


def deviation_table(
    field: CoefficientField,
    radii: Sequence[float],
    dimension: int = 2,
    vector: bool = True,
) -> List[Dict[str, float]]:
    """Deviation bound of the extension from its value at the origin, per ball radius."""
    rows = []
    for rk in radii:
        sample = ball_sample(field, rk, dimension)
        base = sample(np.zeros(dimension))
        if vector:
            def extended(x, sample=sample):
                return extend_divfree(sample, x)
        else:
            def extended(x, sample=sample):
                return extend_reflect(sample, x)
        rows.append({"radius": float(rk), "bound": deviation_bound(extended, base, rk, dimension)})
    return rows


# =====================================
# DIVERGENCE CERTIFICATE
# =====================================


def extension_divergence(sample: BallFieldSample, centres: np.ndarray, h: float) -> np.ndarray:
    """Centred-difference divergence of the extended field at each centre."""
    n = sample.dimension
    values = np.zeros(len(centres))
    for k, x in enumerate(centres):
        total = 0.0
        for axis in range(n):
            step = np.zeros(n)
            step[axis] = h
            plus = extend_divfree(sample, x + step)[axis]
            minus = extend_divfree(sample, x - step)[axis]
            total += (plus - minus) / (2.0 * h)
        values[k] = total
    return values


def annulus_points(radius: float, outer: float, cells: int, dimension: int = 2) -> np.ndarray:
    """Cell centres of a uniform grid on [-outer, outer]^n inside the open annulus, one step clear of its edges."""
    h = 2.0 * outer / cells
    axis = -outer + (np.arange(cells) + 0.5) * h
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    r = np.linalg.norm(points, axis=1)
    keep = (r > radius + h) & (r < outer - h)
    return points[keep]


def extension_divergence_study(
    sample: BallFieldSample,
    outer: float,
    refinements: Sequence[int] = (16, 32, 64),
) -> List[Dict[str, float]]:
    """
    Max discrete divergence over the annulus with a successively refined step.

    Every level uses the cell centres of the coarsest grid, which sit one
    coarse step clear of both spheres, so only the difference step changes.

    Returns:
        One row per level with cells, h, max_divergence and the observed order
        against the previous level (nan for the first level or at the floor)
    """
    rows: List[Dict[str, float]] = []
    centres = annulus_points(sample.radius, outer, min(refinements), sample.dimension)
    for cells in refinements:
        h = 2.0 * outer / cells
        div = extension_divergence(sample, centres, h)
        worst = float(np.max(np.abs(div))) if len(div) else 0.0
        order = float("nan")
        if rows and rows[-1]["max_divergence"] > DIVERGENCE_FLOOR and worst > 0.0:
            order = float(np.log(rows[-1]["max_divergence"] / worst) / np.log(rows[-1]["h"] / h))
        rows.append({"cells": float(cells), "h": h, "max_divergence": worst, "order": order})
        logger.debug("Extension divergence level", cells=cells, max_divergence=worst, order=order)
    return rows


def continuity_jump(sample: BallFieldSample, directions: int = 16, offset: float = 1e-9) -> float:
    """Max |extension just outside the sphere - sample on the sphere| over sphere directions."""
    points = query_points(1.0, sample.dimension, directions, radii=2)[-directions:]
    units = points / np.linalg.norm(points, axis=1)[:, None]
    worst = 0.0
    for xi in units:
        inside = sample(sample.radius * xi)
        outside = extend_divfree(sample, (sample.radius + offset) * xi)
        worst = max(worst, float(np.linalg.norm(outside - inside)))
    return worst
