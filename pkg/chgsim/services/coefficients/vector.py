"""Built-in vector coefficient fields.

Fields given by a stream function s assemble their face-normal samples as
vertex differences of s, so the discrete divergence of the assembled flux
vanishes to round-off and zero s on the boundary makes them exactly tangential.
"""

from abc import abstractmethod
from typing import List, Optional, Sequence

import numpy as np

from chgsim.core.exceptions import ValidationError
from chgsim.services.coefficients.base import VectorField
from chgsim.services.grid import CellField, FaceField, GridSpec, vertex_average


class ConstantVector(VectorField):
    """a(x) = values."""

    name = "constant"

    def __init__(self, values: Sequence[float]):
        values = [float(v) for v in np.atleast_1d(values)]
        super().__init__(values=values)
        self.values = np.asarray(values)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        if len(points) != len(self.values):
            raise ValidationError(
                f"constant vector has {len(self.values)} components on a {len(points)}D domain",
                {"values": self.values.tolist()},
            )
        shape = np.shape(points[0])
        return np.stack([np.full(shape, v) for v in self.values])


class LinearVector(VectorField):
    """a(x) = M x with M = [[m11, m12], [m21, m22]]; divergence m11 + m22."""

    name = "linear"

    def __init__(self, m11: float = 0.0, m12: float = 0.0, m21: float = 0.0, m22: float = 0.0):
        super().__init__(m11=float(m11), m12=float(m12), m21=float(m21), m22=float(m22))
        self.matrix = np.array([[m11, m12], [m21, m22]], dtype=float)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        if len(points) != 2:
            raise ValidationError("linear vector field is defined in 2D only")
        x1, x2 = points
        return np.stack([
            self.matrix[0, 0] * x1 + self.matrix[0, 1] * x2,
            self.matrix[1, 0] * x1 + self.matrix[1, 1] * x2,
        ])


class SineVector(VectorField):
    """a(x) = amplitude sin(pi x1 / L1) e1; tangential on the box, divergence amplitude (pi / L1) cos(pi x1 / L1)."""

    name = "sine"

    def __init__(self, amplitude: float):
        super().__init__(amplitude=float(amplitude))
        self.amplitude = float(amplitude)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        shape = np.shape(points[0])
        comps = [self.amplitude * np.sin(np.pi * points[0] / extents[0])]
        comps.extend(np.zeros(shape) for _ in points[1:])
        return np.stack(comps)


class StreamFunctionField(VectorField):
    """Planar field a = (d s / d x2, -d s / d x1)."""

    @abstractmethod
    def stream(
        self,
        points: Sequence[np.ndarray],
        extents: Sequence[float],
        psi: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Stream function at the points."""
        pass

    def face_normals(self, grid: GridSpec, psi: Optional[CellField] = None) -> FaceField:
        if grid.dimension != 2:
            raise ValidationError(
                f"vector field '{self.name}' needs a 2D grid",
                {"dimension": grid.dimension},
            )
        state = vertex_average(psi) if (psi is not None and self.state_dependent) else None
        s = self.stream(grid.vertices(), grid.extents, state)
        hx, hy = grid.spacing
        axis0 = (s[:, 1:] - s[:, :-1]) / hy
        axis1 = -(s[1:, :] - s[:-1, :]) / hx
        return FaceField(grid, (axis0, axis1))


class RotationField(StreamFunctionField):
    """Rigid rotation omega * (-(x2 - y0), x1 - x0); in 3D about the third axis."""

    name = "rotation"

    def __init__(self, omega: float, x0: float = 0.0, y0: float = 0.0):
        super().__init__(omega=float(omega), x0=float(x0), y0=float(y0))
        self.omega = float(omega)
        self.center = (float(x0), float(y0))

    def stream(self, points, extents, psi=None) -> np.ndarray:
        dx = points[0] - self.center[0]
        dy = points[1] - self.center[1]
        return -0.5 * self.omega * (dx ** 2 + dy ** 2)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        if len(points) not in (2, 3):
            raise ValidationError("rotation field needs 2 or 3 dimensions")
        dx = points[0] - self.center[0]
        dy = points[1] - self.center[1]
        comps = [-self.omega * dy, self.omega * dx]
        if len(points) == 3:
            comps.append(np.zeros(np.shape(points[0])))
        return np.stack(comps)


class ShearField(StreamFunctionField):
    """omega * (sin 2 pi x2, sin 2 pi x1)."""

    name = "shear"

    def __init__(self, omega: float):
        super().__init__(omega=float(omega))
        self.omega = float(omega)

    def stream(self, points, extents, psi=None) -> np.ndarray:
        k = 2.0 * np.pi
        return (self.omega / k) * (np.cos(k * points[0]) - np.cos(k * points[1]))

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        k = 2.0 * np.pi
        return np.stack([self.omega * np.sin(k * points[1]), self.omega * np.sin(k * points[0])])


def _window(points: Sequence[np.ndarray], extents: Sequence[float]) -> List[np.ndarray]:
    """w = sin(pi x1 / L1) sin(pi x2 / L2) and its two partial derivatives."""
    (x1, x2), (l1, l2) = points[:2], extents[:2]
    s1, s2 = np.sin(np.pi * x1 / l1), np.sin(np.pi * x2 / l2)
    c1, c2 = np.cos(np.pi * x1 / l1), np.cos(np.pi * x2 / l2)
    return [s1 * s2, (np.pi / l1) * c1 * s2, (np.pi / l2) * s1 * c2]


class VortexField(StreamFunctionField):
    """Cellular vortex with stream function (omega / pi) w(x); tangential on the rectangle."""

    name = "vortex"

    def __init__(self, omega: float):
        super().__init__(omega=float(omega))
        self.omega = float(omega)

    def stream(self, points, extents, psi=None) -> np.ndarray:
        return (self.omega / np.pi) * _window(points, extents)[0]

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        _, dw1, dw2 = _window(points, extents)
        scale = self.omega / np.pi
        return np.stack([scale * dw2, -scale * dw1])


class ModulatedVortexField(StreamFunctionField):
    """State-dependent vortex with stream function kappa * w(x) * psi."""

    name = "modulated_vortex"
    state_dependent = True

    def __init__(self, kappa: float):
        super().__init__(kappa=float(kappa))
        self.kappa = float(kappa)

    def stream(self, points, extents, psi=None) -> np.ndarray:
        if psi is None:
            raise ValidationError("modulated_vortex needs the order parameter")
        return self.kappa * _window(points, extents)[0] * psi

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        if psi is None or grad_psi is None:
            raise ValidationError("modulated_vortex needs the order parameter and its gradient")
        w, dw1, dw2 = _window(points, extents)
        ds1 = dw1 * psi + w * grad_psi[0]
        ds2 = dw2 * psi + w * grad_psi[1]
        return np.stack([self.kappa * ds2, -self.kappa * ds1])
