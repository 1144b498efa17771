"""Cell-centred finite-volume mesh on a rectangle with staggered face fluxes.

Cells carry scalar fields, faces carry face-normal components along the
positive axis direction. Boundary faces hold imposed flux data (zero for
homogeneous Neumann closure); they never enter volume pairings, which is what
makes summation by parts exact:

    inner(divergence(F), u) = -inner(F, gradient(u)) + boundary_integral(F * u)
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict

from chgsim.core.exceptions import ValidationError

ArrayLike = Union[float, np.ndarray]

# side name -> (axis, is_high_side)
SIDES: Dict[str, Tuple[int, bool]] = {
    "left": (0, False),
    "right": (0, True),
    "bottom": (1, False),
    "top": (1, True),
}

MIN_CELLS = 4


class BcKind(str, Enum):
    """Boundary closure of the mesh."""

    NEUMANN_HOMOGENEOUS = "neumann_homogeneous"
    NEUMANN_DATA = "neumann_data"


class GridSpec(BaseModel):
    """Uniform rectangular cell-centred mesh."""

    model_config = ConfigDict(frozen=True)

    dimension: int
    extents: Tuple[float, ...]
    cells: Tuple[int, ...]
    spacing: Tuple[float, ...]
    bc_kind: BcKind = BcKind.NEUMANN_HOMOGENEOUS

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.cells

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def domain_volume(self) -> float:
        return float(np.prod(self.extents))

    def face_shape(self, axis: int) -> Tuple[int, ...]:
        shape = list(self.cells)
        shape[axis] += 1
        return tuple(shape)

    def face_area(self, axis: int) -> float:
        """Area of one face normal to ``axis`` (1 in one dimension)."""
        return float(np.prod([h for i, h in enumerate(self.spacing) if i != axis]))

    @property
    def n_faces(self) -> int:
        return int(sum(np.prod(self.face_shape(axis)) for axis in range(self.dimension)))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def axis_nodes(self, axis: int) -> np.ndarray:
        return np.arange(self.cells[axis] + 1) * self.spacing[axis]

    def cell_centers(self) -> List[np.ndarray]:
        """Coordinate arrays of cell centres, each of shape ``self.shape``."""
        return list(np.meshgrid(*[self.axis_centers(i) for i in range(self.dimension)], indexing="ij"))

    def face_centers(self, axis: int) -> List[np.ndarray]:
        """Coordinate arrays of the centres of faces normal to ``axis``."""
        axes = [
            self.axis_nodes(i) if i == axis else self.axis_centers(i)
            for i in range(self.dimension)
        ]
        return list(np.meshgrid(*axes, indexing="ij"))

    def vertices(self) -> List[np.ndarray]:
        """Coordinate arrays of mesh vertices (2D only)."""
        return list(np.meshgrid(*[self.axis_nodes(i) for i in range(self.dimension)], indexing="ij"))


@dataclass
class CellField:
    """One real value per cell."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)

    def copy(self) -> "CellField":
        return CellField(self.grid, self.values.copy())

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()


@dataclass
class FaceField:
    """Face-normal components, one array per axis."""

    grid: GridSpec
    components: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        self.components = tuple(
            np.asarray(comp, dtype=float).reshape(self.grid.face_shape(axis))
            for axis, comp in enumerate(self.components)
        )

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([comp.ravel() for comp in self.components])

    @classmethod
    def from_flat(cls, grid: GridSpec, flat: np.ndarray) -> "FaceField":
        comps = []
        start = 0
        for axis in range(grid.dimension):
            size = int(np.prod(grid.face_shape(axis)))
            comps.append(flat[start:start + size])
            start += size
        return cls(grid, tuple(comps))

    def __add__(self, other: "FaceField") -> "FaceField":
        return FaceField(self.grid, tuple(a + b for a, b in zip(self.components, other.components)))

    def scaled(self, weights: Sequence[np.ndarray]) -> "FaceField":
        """Multiply each component by a face-sampled coefficient."""
        return FaceField(self.grid, tuple(c * w for c, w in zip(self.components, weights)))


# =====================================
# CONSTRUCTION
# =====================================


def make_grid(
    dimension: int,
    extents: Sequence[float],
    cells: Sequence[int],
    bc_kind: Union[BcKind, str] = BcKind.NEUMANN_HOMOGENEOUS,
) -> GridSpec:
    """
    Build a uniform mesh on [0, L_1] x ... x [0, L_n].

    Args:
        dimension: 1 or 2
        extents: per-axis physical length
        cells: per-axis cell count (at least 4)
        bc_kind: boundary closure

    Returns:
        GridSpec with spacing computed
    """
    if dimension not in (1, 2):
        raise ValidationError("grid dimension must be 1 or 2", {"dimension": dimension})
    if len(extents) != dimension or len(cells) != dimension:
        raise ValidationError(
            "grid extents and cells must have one entry per axis",
            {"dimension": dimension, "extents": list(extents), "cells": list(cells)},
        )
    if any(float(length) <= 0.0 for length in extents):
        raise ValidationError("grid extents must be positive", {"extents": list(extents)})
    if any(int(n) < MIN_CELLS for n in cells):
        raise ValidationError(
            f"grid is undersized: every axis needs at least {MIN_CELLS} cells",
            {"cells": list(cells)},
        )

    spacing = tuple(float(length) / int(n) for length, n in zip(extents, cells))
    # store extents as spacing * cells so the product is exact in the stored representation
    stored = tuple(h * int(n) for h, n in zip(spacing, cells))
    return GridSpec(
        dimension=dimension,
        extents=stored,
        cells=tuple(int(n) for n in cells),
        spacing=spacing,
        bc_kind=BcKind(bc_kind),
    )


def cell_field(grid: GridSpec, source: Union[float, np.ndarray, Callable[..., np.ndarray]]) -> CellField:
    """Build a CellField from a constant, an array or a function of cell-centre coordinates."""
    if callable(source):
        return CellField(grid, source(*grid.cell_centers()))
    return CellField(grid, np.broadcast_to(np.asarray(source, dtype=float), grid.shape).copy())


def zero_faces(grid: GridSpec) -> FaceField:
    return FaceField(grid, tuple(np.zeros(grid.face_shape(axis)) for axis in range(grid.dimension)))


def boundary_field(grid: GridSpec, outward: Mapping[str, ArrayLike]) -> FaceField:
    """
    Boundary-only FaceField from outward-normal data per side.

    Args:
        grid: mesh
        outward: side name -> outward flux (scalar or one value per boundary face)

    Returns:
        FaceField with zero interior faces; low sides carry the negated outward value
    """
    field = zero_faces(grid)
    comps = [c.copy() for c in field.components]
    for side, value in outward.items():
        axis, high = SIDES[side]
        if axis >= grid.dimension:
            raise ValidationError(f"side '{side}' does not exist on a {grid.dimension}D grid")
        index = [slice(None)] * grid.dimension
        index[axis] = -1 if high else 0
        sign = 1.0 if high else -1.0
        comps[axis][tuple(index)] = sign * np.asarray(value, dtype=float)
    return FaceField(grid, tuple(comps))


def boundary_face_centers(grid: GridSpec, side: str) -> List[np.ndarray]:
    """Coordinates of face centres on one side of the rectangle."""
    axis, high = SIDES[side]
    centers = grid.face_centers(axis)
    index = [slice(None)] * grid.dimension
    index[axis] = -1 if high else 0
    return [c[tuple(index)] for c in centers]


def sides(grid: GridSpec) -> List[str]:
    return [name for name, (axis, _) in SIDES.items() if axis < grid.dimension]


# =====================================
# DISCRETE CALCULUS
# =====================================


def _interior(axis: int, dimension: int) -> Tuple[slice, ...]:
    index = [slice(None)] * dimension
    index[axis] = slice(1, -1)
    return tuple(index)


def gradient(u: CellField, boundary: Union[FaceField, None] = None) -> FaceField:
    """
    Face-normal gradient.

    Interior faces carry (u_right - u_left) / h; boundary faces carry the
    imposed datum (zero unless ``boundary`` is given).
    """
    grid = u.grid
    comps = []
    for axis in range(grid.dimension):
        comp = np.zeros(grid.face_shape(axis))
        comp[_interior(axis, grid.dimension)] = np.diff(u.values, axis=axis) / grid.spacing[axis]
        if boundary is not None:
            comp += _boundary_only(boundary.components[axis], axis)
        comps.append(comp)
    return FaceField(grid, tuple(comps))


def _boundary_only(comp: np.ndarray, axis: int) -> np.ndarray:
    out = np.zeros_like(comp)
    index = [slice(None)] * comp.ndim
    for end in (0, -1):
        index[axis] = end
        out[tuple(index)] = comp[tuple(index)]
    return out


def divergence(F: FaceField) -> CellField:
    """Sum over faces of signed normal flux divided by h, per axis."""
    grid = F.grid
    values = np.zeros(grid.shape)
    for axis, comp in enumerate(F.components):
        values += np.diff(comp, axis=axis) / grid.spacing[axis]
    return CellField(grid, values)


def laplacian(u: CellField, boundary: Union[FaceField, None] = None) -> CellField:
    """divergence(gradient(u)); the closure is the zero (or imposed) boundary flux."""
    return divergence(gradient(u, boundary))


def face_average(u: CellField) -> FaceField:
    """Arithmetic mean of the two neighbouring cells on interior faces; zero on the boundary."""
    grid = u.grid
    comps = []
    for axis in range(grid.dimension):
        comp = np.zeros(grid.face_shape(axis))
        lo = [slice(None)] * grid.dimension
        hi = [slice(None)] * grid.dimension
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        comp[_interior(axis, grid.dimension)] = 0.5 * (u.values[tuple(lo)] + u.values[tuple(hi)])
        comps.append(comp)
    return FaceField(grid, tuple(comps))


def integrate(u: CellField) -> float:
    """Sum of values times cell volume."""
    return float(np.sum(u.values) * u.grid.cell_volume)


def inner(u: Union[CellField, FaceField], v: Union[CellField, FaceField]) -> float:
    """
    Volume-weighted L2 pairing.

    CellFields pair over cells; FaceFields pair over interior faces, each
    weighted by the dual-cell volume (equal to the cell volume).
    """
    if isinstance(u, CellField) and isinstance(v, CellField):
        return float(np.sum(u.values * v.values) * u.grid.cell_volume)
    if isinstance(u, FaceField) and isinstance(v, FaceField):
        grid = u.grid
        total = 0.0
        for axis in range(grid.dimension):
            index = _interior(axis, grid.dimension)
            total += float(np.sum(u.components[axis][index] * v.components[axis][index]))
        return total * grid.cell_volume
    raise TypeError("inner() needs two CellFields or two FaceFields")


def norm(u: Union[CellField, FaceField]) -> float:
    return float(np.sqrt(max(inner(u, u), 0.0)))


def boundary_integral(F: FaceField) -> float:
    """Signed sum of outward boundary-face fluxes times face area."""
    grid = F.grid
    total = 0.0
    for axis, comp in enumerate(F.components):
        index = [slice(None)] * grid.dimension
        index[axis] = -1
        high = np.sum(comp[tuple(index)])
        index[axis] = 0
        low = np.sum(comp[tuple(index)])
        total += float(high - low) * grid.face_area(axis)
    return total


def boundary_pairing(F: FaceField, u: CellField) -> float:
    """Boundary integral of (outward flux of F) times the adjacent cell value of u."""
    grid = F.grid
    total = 0.0
    for axis, comp in enumerate(F.components):
        index = [slice(None)] * grid.dimension
        index[axis] = -1
        high = np.sum(comp[tuple(index)] * u.values[tuple(index)])
        index[axis] = 0
        low = np.sum(comp[tuple(index)] * u.values[tuple(index)])
        total += float(high - low) * grid.face_area(axis)
    return total


def neumann_lambda1(grid: GridSpec) -> float:
    """First nontrivial eigenvalue of the negative Neumann Laplacian on the rectangle."""
    return float((np.pi / max(grid.extents)) ** 2)


# =====================================
# SPARSE OPERATORS
# =====================================


def _axis_divergence(n: int, h: float) -> sp.csr_matrix:
    return sp.diags([-np.ones(n), np.ones(n)], [0, 1], shape=(n, n + 1), format="csr") / h


def _axis_gradient(n: int, h: float) -> sp.csr_matrix:
    grad = sp.lil_matrix((n + 1, n))
    for i in range(1, n):
        grad[i, i - 1] = -1.0 / h
        grad[i, i] = 1.0 / h
    return grad.tocsr()


def _axis_average(n: int) -> sp.csr_matrix:
    avg = sp.lil_matrix((n + 1, n))
    for i in range(1, n):
        avg[i, i - 1] = 0.5
        avg[i, i] = 0.5
    return avg.tocsr()


def _lift(axis_op: sp.spmatrix, axis: int, grid: GridSpec) -> sp.csr_matrix:
    """Embed a 1D operator acting along ``axis`` into the C-ordered tensor product."""
    if grid.dimension == 1:
        return sp.csr_matrix(axis_op)
    other = grid.cells[1 - axis]
    eye = sp.identity(other, format="csr")
    if axis == 0:
        return sp.kron(axis_op, eye, format="csr")
    return sp.kron(eye, axis_op, format="csr")


@lru_cache(maxsize=32)
def divergence_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Sparse (cells x faces) divergence acting on FaceField.flat."""
    blocks = [
        _lift(_axis_divergence(grid.cells[axis], grid.spacing[axis]), axis, grid)
        for axis in range(grid.dimension)
    ]
    return sp.hstack(blocks, format="csr")


@lru_cache(maxsize=32)
def gradient_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Sparse (faces x cells) gradient with zero boundary rows."""
    blocks = [
        _lift(_axis_gradient(grid.cells[axis], grid.spacing[axis]), axis, grid)
        for axis in range(grid.dimension)
    ]
    return sp.vstack(blocks, format="csr")


@lru_cache(maxsize=32)
def face_average_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Sparse (faces x cells) interior face average with zero boundary rows."""
    blocks = [_lift(_axis_average(grid.cells[axis]), axis, grid) for axis in range(grid.dimension)]
    return sp.vstack(blocks, format="csr")


@lru_cache(maxsize=32)
def laplacian_matrix(grid: GridSpec) -> sp.csr_matrix:
    return (divergence_matrix(grid) @ gradient_matrix(grid)).tocsr()


def vertex_average(u: CellField) -> np.ndarray:
    """Values at mesh vertices (2D): mean of the surrounding cells, edge cells repeated."""
    if u.grid.dimension != 2:
        raise ValidationError("vertex values exist only on 2D grids")
    padded = np.pad(u.values, 1, mode="edge")
    return 0.25 * (padded[:-1, :-1] + padded[1:, :-1] + padded[:-1, 1:] + padded[1:, 1:])


def cell_gradient(u: CellField) -> List[np.ndarray]:
    """Centred-difference gradient at cell centres, one array per axis."""
    if u.grid.dimension == 1:
        return [np.gradient(u.values, u.grid.spacing[0])]
    return list(np.gradient(u.values, *u.grid.spacing))


def face_values(u: CellField, axis: int) -> np.ndarray:
    """Cell values carried to faces normal to ``axis``: interior mean, boundary copies the adjacent cell."""
    padded_shape = [(0, 0)] * u.grid.dimension
    padded_shape[axis] = (1, 1)
    padded = np.pad(u.values, padded_shape, mode="edge")
    lo = [slice(None)] * u.grid.dimension
    hi = [slice(None)] * u.grid.dimension
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (padded[tuple(lo)] + padded[tuple(hi)])
