"""Built-in scalar mobility fields."""

from typing import Optional, Sequence

import numpy as np

from chgsim.core.exceptions import ValidationError
from chgsim.services.coefficients.base import ScalarField


class ConstantScalar(ScalarField):
    """b(x) = value."""

    name = "constant"

    def __init__(self, value: float):
        super().__init__(value=float(value))
        self.value = float(value)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        return np.full(np.shape(points[0]), self.value)


class BumpScalar(ScalarField):
    """b(x) = b0 + amplitude * prod_i cos(pi x_i / L_i); crosses zero when amplitude > b0."""

    name = "bump"

    def __init__(self, b0: float, amplitude: float):
        super().__init__(b0=float(b0), amplitude=float(amplitude))
        self.b0 = float(b0)
        self.amplitude = float(amplitude)

    def evaluate(self, points, extents, psi=None, grad_psi=None) -> np.ndarray:
        shape = np.ones(np.shape(points[0]))
        for x, length in zip(points, extents):
            shape = shape * np.cos(np.pi * x / length)
        return self.b0 + self.amplitude * shape


class SaturatingScalar(ScalarField):
    """State-dependent mobility b = b0 + b1 psi^2 / (1 + psi^2)."""

    name = "saturating"
    state_dependent = True

    def __init__(self, b0: float, b1: float):
        super().__init__(b0=float(b0), b1=float(b1))
        self.b0 = float(b0)
        self.b1 = float(b1)

    def evaluate(
        self,
        points: Sequence[np.ndarray],
        extents: Sequence[float],
        psi: Optional[np.ndarray] = None,
        grad_psi: Optional[Sequence[np.ndarray]] = None,
    ) -> np.ndarray:
        if psi is None:
            raise ValidationError("saturating mobility needs the order parameter")
        squared = np.asarray(psi) ** 2
        return self.b0 + self.b1 * squared / (1.0 + squared)
