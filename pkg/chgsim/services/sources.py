"""Initial conditions, volumetric sources and boundary data."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Type

import numpy as np

from chgsim.config import settings
from chgsim.core.exceptions import ConfigError, NotFoundError, ValidationError
from chgsim.core.logger import logger
from chgsim.models import BuiltinRef, DataBlock
from chgsim.services.grid import (
    SIDES,
    CellField,
    FaceField,
    GridSpec,
    boundary_face_centers,
    boundary_field,
    sides,
)

# (points, t) -> values at the points
PointFunction = Callable[[List[np.ndarray], float], np.ndarray]


def _build(registry: str, table: Dict[str, Type[Any]], ref: BuiltinRef, **context: Any) -> Any:
    if ref.name not in table:
        raise NotFoundError(registry, ref.name, sorted(table))
    try:
        return table[ref.name](**ref.params, **context)
    except TypeError as exc:
        raise ConfigError(
            f"invalid parameters for {registry} built-in '{ref.name}'",
            [{"key": ref.name, "message": str(exc)}],
        ) from exc


# =====================================
# INITIAL CONDITIONS
# =====================================


class InitialCondition(ABC):
    """Initial order parameter."""

    name: str = ""

    @abstractmethod
    def values(self, grid: GridSpec, seed: int = 0) -> np.ndarray:
        """Cell values of psi_0."""
        pass

    def normal_derivative(self, grid: GridSpec) -> Optional[Dict[str, np.ndarray]]:
        """Outward normal derivative per side, or None when compatible by closure."""
        return None


class UniformInitial(InitialCondition):
    name = "uniform"

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def values(self, grid, seed=0):
        return np.full(grid.shape, self.value)

    def normal_derivative(self, grid):
        return {side: np.zeros(boundary_face_centers(grid, side)[0].shape) for side in sides(grid)}


class CosineInitial(InitialCondition):
    """mean + amplitude * cos(mode pi x1 / L1) [* cos(mode_y pi x2 / L2)]."""

    name = "cosine"

    def __init__(self, mean: float = 0.0, amplitude: float = 0.1, mode: int = 1, mode_y: int = 0):
        self.mean = float(mean)
        self.amplitude = float(amplitude)
        self.modes = (int(mode), int(mode_y))

    def _evaluate(self, points: List[np.ndarray], extents, derivative: Optional[int] = None) -> np.ndarray:
        result = np.full(np.shape(points[0]), self.amplitude)
        for axis, (x, length) in enumerate(zip(points, extents)):
            k = self.modes[axis] * np.pi / length
            if derivative == axis:
                result = result * (-k * np.sin(k * x))
            else:
                result = result * np.cos(k * x)
        return result if derivative is not None else self.mean + result

    def values(self, grid, seed=0):
        return self._evaluate(grid.cell_centers(), grid.extents)

    def normal_derivative(self, grid):
        out = {}
        for side in sides(grid):
            axis, high = SIDES[side]
            points = boundary_face_centers(grid, side)
            sign = 1.0 if high else -1.0
            out[side] = sign * self._evaluate(points, grid.extents, derivative=axis)
        return out


class TanhInitial(InitialCondition):
    """mean + tanh((x1 - position L1) / width): a diffuse interface across the first axis."""

    name = "tanh_profile"

    def __init__(self, mean: float = 0.0, width: float = 0.1, position: float = 0.5):
        if width <= 0.0:
            raise ValidationError("tanh_profile width must be positive", {"width": width})
        self.mean = float(mean)
        self.width = float(width)
        self.position = float(position)

    def values(self, grid, seed=0):
        x1 = grid.cell_centers()[0]
        return self.mean + np.tanh((x1 - self.position * grid.extents[0]) / self.width)

    def normal_derivative(self, grid):
        out = {}
        for side in sides(grid):
            axis, high = SIDES[side]
            points = boundary_face_centers(grid, side)
            if axis == 0:
                arg = (points[0] - self.position * grid.extents[0]) / self.width
                deriv = 1.0 / (self.width * np.cosh(arg) ** 2)
                out[side] = deriv if high else -deriv
            else:
                out[side] = np.zeros(points[0].shape)
        return out


class NoiseInitial(InitialCondition):
    """mean + amplitude * U(-1, 1) per cell from a seeded PCG64 generator."""

    name = "noise"

    def __init__(self, mean: float = 0.0, amplitude: float = 0.01):
        self.mean = float(mean)
        self.amplitude = float(amplitude)

    def values(self, grid, seed=0):
        rng = np.random.Generator(np.random.PCG64(seed))
        return self.mean + self.amplitude * rng.uniform(-1.0, 1.0, size=grid.shape)


class ManufacturedInitial(InitialCondition):
    """psi*(0, x) = cos(pi x1 / L1)."""

    name = "manufactured"

    def __init__(self):
        self.cosine = CosineInitial(mean=0.0, amplitude=1.0, mode=1)

    def values(self, grid, seed=0):
        return self.cosine.values(grid)

    def normal_derivative(self, grid):
        return self.cosine.normal_derivative(grid)


INITIAL_CONDITIONS: Dict[str, Type[InitialCondition]] = {
    "uniform": UniformInitial,
    "cosine": CosineInitial,
    "tanh_profile": TanhInitial,
    "noise": NoiseInitial,
    "manufactured": ManufacturedInitial,
}


def get_initial_condition(ref: BuiltinRef) -> InitialCondition:
    return _build("initial condition", INITIAL_CONDITIONS, ref)


def initial_field(ref: BuiltinRef, grid: GridSpec, seed: int = 0) -> CellField:
    return CellField(grid, get_initial_condition(ref).values(grid, seed))


# =====================================
# VOLUMETRIC SOURCES
# =====================================


class CellSource(ABC):
    """Time-dependent cell source (f or g)."""

    name: str = ""
    is_zero: bool = False

    @abstractmethod
    def values(self, grid: GridSpec, t: float) -> np.ndarray:
        pass


class ZeroSource(CellSource):
    name = "zero"
    is_zero = True

    def __init__(self):
        pass

    def values(self, grid, t):
        return np.zeros(grid.shape)


class ConstantSource(CellSource):
    name = "constant"

    def __init__(self, value: float):
        self.value = float(value)
        self.is_zero = self.value == 0.0

    def values(self, grid, t):
        return np.full(grid.shape, self.value)


class FunctionSource(CellSource):
    """Source given by a point function of (x, t), evaluated at cell centres."""

    def __init__(self, func: PointFunction, name: str = "function"):
        self.func = func
        self.name = name

    def values(self, grid, t):
        return np.broadcast_to(self.func(grid.cell_centers(), t), grid.shape).astype(float)


# =====================================
# BOUNDARY DATA
# =====================================


class BoundarySource(ABC):
    """Outward-normal boundary datum (h1 for the mobility flux, h2 for the normal derivative)."""

    name: str = ""
    is_zero: bool = False

    @abstractmethod
    def outward(self, grid: GridSpec, t: float) -> Dict[str, np.ndarray]:
        pass

    def field(self, grid: GridSpec, t: float) -> FaceField:
        return boundary_field(grid, self.outward(grid, t))


class ZeroBoundary(BoundarySource):
    name = "zero"
    is_zero = True

    def __init__(self):
        pass

    def outward(self, grid, t):
        return {}


class FaceBoundary(BoundarySource):
    """Constant outward value on one side."""

    name = "face"

    def __init__(self, side: str, value: float):
        if side not in SIDES:
            raise ValidationError(f"unknown side '{side}'", {"sides": list(SIDES)})
        self.side = side
        self.value = float(value)
        self.is_zero = self.value == 0.0

    def outward(self, grid, t):
        return {self.side: np.full(boundary_face_centers(grid, self.side)[0].shape, self.value)}


SOURCES: Dict[str, Type[CellSource]] = {"zero": ZeroSource, "constant": ConstantSource}
BOUNDARY_SOURCES: Dict[str, Type[BoundarySource]] = {"zero": ZeroBoundary, "face": FaceBoundary}


@dataclass
class SourceData:
    """f, g, h1, h2 of the system."""

    f: CellSource
    g: CellSource
    h1: BoundarySource
    h2: BoundarySource

    @property
    def homogeneous(self) -> bool:
        return self.f.is_zero and self.g.is_zero and self.h1.is_zero and self.h2.is_zero

    @classmethod
    def zero(cls) -> "SourceData":
        return cls(ZeroSource(), ZeroSource(), ZeroBoundary(), ZeroBoundary())


def build_source_data(block: DataBlock, manufactured: Optional[Any] = None) -> SourceData:
    """
    Resolve the data block against the registries.

    Args:
        block: data section of the run config
        manufactured: manufactured case supplying f and g for the ``manufactured`` built-in

    Returns:
        SourceData
    """
    def cell(ref: BuiltinRef, which: str) -> CellSource:
        if ref.name == "manufactured":
            if manufactured is None:
                raise ConfigError(
                    f"data.{which} = manufactured needs initial.psi0 = manufactured",
                    [{"key": f"data.{which}", "message": "no manufactured case in this run"}],
                )
            return manufactured.source(which)
        return _build("source", SOURCES, ref)

    def bnd(ref: BuiltinRef) -> BoundarySource:
        if ref.name == "manufactured":
            # the manufactured case has homogeneous boundary data
            return ZeroBoundary()
        return _build("boundary source", BOUNDARY_SOURCES, ref)

    data = SourceData(f=cell(block.f, "f"), g=cell(block.g, "g"), h1=bnd(block.h1), h2=bnd(block.h2))
    logger.debug("Resolved source data", homogeneous=data.homogeneous)
    return data


def check_compatibility(
    initial: InitialCondition,
    data: SourceData,
    grid: GridSpec,
    tol: Optional[float] = None,
) -> float:
    """
    Compare the initial outward normal derivative with h2 at t = 0.

    Returns:
        Max mismatch over boundary faces (0 when compatible by closure)

    Raises:
        ValidationError: when the mismatch exceeds the tolerance
    """
    tol = settings.VALIDATOR_TOL if tol is None else tol
    normal = initial.normal_derivative(grid)
    if normal is None:
        return 0.0
    h2 = data.h2.outward(grid, 0.0)
    worst = 0.0
    for side in sides(grid):
        expected = np.asarray(h2.get(side, 0.0))
        worst = max(worst, float(np.max(np.abs(normal[side] - expected))))
    if worst > tol:
        raise ValidationError(
            "initial data violate the Neumann compatibility condition",
            {"mismatch": worst, "tolerance": tol, "initial": initial.name},
        )
    return worst
