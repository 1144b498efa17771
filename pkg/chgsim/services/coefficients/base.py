"""Base interface for constitutive coefficient fields."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from chgsim.core.exceptions import ValidationError
from chgsim.services.grid import (
    CellField,
    FaceField,
    GridSpec,
    cell_gradient,
    face_values,
)


class CoefficientMode(str, Enum):
    """How coefficients enter the time stepper."""

    SEMILINEAR = "semilinear"
    QUASILINEAR = "quasilinear"


class CoefficientField(ABC):
    """Common behaviour of scalar and vector coefficient fields."""

    name: str = ""
    state_dependent: bool = False

    def __init__(self, **params: Any):
        self.params: Dict[str, Any] = params

    @abstractmethod
    def evaluate(
        self,
        points: Sequence[np.ndarray],
        extents: Sequence[float],
        psi: Optional[np.ndarray] = None,
        grad_psi: Optional[Sequence[np.ndarray]] = None,
    ) -> np.ndarray:
        """
        Evaluate the field at arbitrary points.

        Args:
            points: coordinate arrays, one per axis, all of one shape
            extents: domain lengths (fields shaped to the rectangle use them)
            psi: order parameter at the points (state-dependent fields only)
            grad_psi: gradient of the order parameter at the points

        Returns:
            Array of the points' shape (scalar) or (n, *shape) (vector)
        """
        pass

    def describe(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}({args})"

    def _cell_state(self, grid: GridSpec, psi: Optional[CellField]):
        if psi is None or not self.state_dependent:
            return None, None
        return psi.values, cell_gradient(psi)

    def _face_state(self, grid: GridSpec, psi: Optional[CellField], axis: int):
        if psi is None or not self.state_dependent:
            return None, None
        grads = [CellField(grid, g) for g in cell_gradient(psi)]
        return face_values(psi, axis), [face_values(g, axis) for g in grads]


class ScalarField(CoefficientField):
    """Scalar coefficient (the mobility b)."""

    def on_cells(self, grid: GridSpec, psi: Optional[CellField] = None) -> np.ndarray:
        state, grad = self._cell_state(grid, psi)
        values = self.evaluate(grid.cell_centers(), grid.extents, state, grad)
        return np.broadcast_to(values, grid.shape).astype(float)

    def on_faces(self, grid: GridSpec, psi: Optional[CellField] = None) -> Tuple[np.ndarray, ...]:
        samples = []
        for axis in range(grid.dimension):
            state, grad = self._face_state(grid, psi, axis)
            values = self.evaluate(grid.face_centers(axis), grid.extents, state, grad)
            samples.append(np.broadcast_to(values, grid.face_shape(axis)).astype(float))
        return tuple(samples)


class VectorField(CoefficientField):
    """Vector coefficient (a or c)."""

    def on_cells(self, grid: GridSpec, psi: Optional[CellField] = None) -> np.ndarray:
        state, grad = self._cell_state(grid, psi)
        values = self.evaluate(grid.cell_centers(), grid.extents, state, grad)
        return np.broadcast_to(values, (grid.dimension,) + grid.shape).astype(float)

    def on_faces(self, grid: GridSpec, psi: Optional[CellField] = None) -> List[np.ndarray]:
        """Full vectors at the centres of faces normal to each axis."""
        samples = []
        for axis in range(grid.dimension):
            state, grad = self._face_state(grid, psi, axis)
            values = self.evaluate(grid.face_centers(axis), grid.extents, state, grad)
            samples.append(
                np.broadcast_to(values, (grid.dimension,) + grid.face_shape(axis)).astype(float)
            )
        return samples

    def face_normals(self, grid: GridSpec, psi: Optional[CellField] = None) -> FaceField:
        """Face-normal components, boundary faces included."""
        full = self.on_faces(grid, psi)
        return FaceField(grid, tuple(full[axis][axis] for axis in range(grid.dimension)))


@dataclass
class FrozenCoefficients:
    """Face samples of (a, c, b) used to assemble one step."""

    a_faces: Tuple[np.ndarray, ...]
    c_faces: Tuple[np.ndarray, ...]
    b_faces: Tuple[np.ndarray, ...]

    def flat(self, name: str) -> np.ndarray:
        return np.concatenate([comp.ravel() for comp in getattr(self, f"{name}_faces")])

    def same_as(self, other: "FrozenCoefficients") -> bool:
        return all(
            np.array_equal(x, y)
            for name in ("a_faces", "c_faces", "b_faces")
            for x, y in zip(getattr(self, name), getattr(other, name))
        )


@dataclass
class CoefficientSet:
    """Constitutive data (beta, a, c, b) with the certified ellipticity margin."""

    beta: float
    a: VectorField
    c: VectorField
    b: ScalarField
    mode: CoefficientMode = CoefficientMode.SEMILINEAR
    epsilon: Optional[float] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.beta > 0.0:
            raise ValidationError("coefficients.beta must be positive", {"beta": self.beta})
        if self.mode == CoefficientMode.SEMILINEAR and self.state_dependent:
            raise ValidationError(
                "state-dependent coefficient fields need coefficients.mode = quasilinear",
                {"a": self.a.describe(), "c": self.c.describe(), "b": self.b.describe()},
            )

    @property
    def state_dependent(self) -> bool:
        return self.a.state_dependent or self.c.state_dependent or self.b.state_dependent

    def freeze(self, grid: GridSpec, psi: Optional[CellField] = None) -> FrozenCoefficients:
        """
        Sample the coefficients on faces.

        In quasilinear mode the state-dependent fields are evaluated at ``psi``;
        in semilinear mode the state is ignored.
        """
        state = psi if self.mode == CoefficientMode.QUASILINEAR else None
        return FrozenCoefficients(
            a_faces=self.a.face_normals(grid, state).components,
            c_faces=self.c.face_normals(grid, state).components,
            b_faces=self.b.on_faces(grid, state),
        )
