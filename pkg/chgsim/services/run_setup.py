"""Resolution of a RunConfig into the objects a run needs."""

from dataclasses import dataclass
from typing import Optional

from chgsim.core.exceptions import ConfigError
from chgsim.core.logger import logger
from chgsim.models import BuiltinRef, CoefficientsBlock, GrowthReport, RunConfig
from chgsim.services.coefficients import CoefficientSet, get_scalar_field, get_vector_field
from chgsim.services.coefficients.base import VectorField
from chgsim.services.grid import CellField, GridSpec, make_grid, neumann_lambda1
from chgsim.services.manufactured import ManufacturedCase
from chgsim.services.potential import PotentialSpec, potential_from_block, validate_growth
from chgsim.services.solver import Simulation, with_shifted_mean
from chgsim.services.sources import (
    InitialCondition,
    SourceData,
    build_source_data,
    check_compatibility,
    get_initial_condition,
)


@dataclass
class RunSetup:
    """Everything a simulation needs, resolved and cross-checked."""

    config: RunConfig
    grid: GridSpec
    coeffs: CoefficientSet
    potential: PotentialSpec
    data: SourceData
    initial: InitialCondition
    psi0: CellField
    growth: GrowthReport
    mean_shift: float = 0.0
    manufactured: Optional[ManufacturedCase] = None


def _vector(ref: Optional[BuiltinRef], dimension: int) -> VectorField:
    if ref is None:
        return get_vector_field("constant", values=[0.0] * dimension)
    return get_vector_field(ref.name, **ref.params)


def build_coefficients(block: CoefficientsBlock, dimension: int) -> CoefficientSet:
    return CoefficientSet(
        beta=block.beta,
        a=_vector(block.a, dimension),
        c=_vector(block.c, dimension),
        b=get_scalar_field(block.b.name, **block.b.params),
        mode=block.mode,
    )


def build_grid(config: RunConfig) -> GridSpec:
    if config.grid is None:
        raise ConfigError("invalid configuration", [{"key": "grid", "message": "missing mandatory section [grid]"}])
    block = config.grid
    return make_grid(block.dimension, block.extents, block.cells)


def build_run(config: RunConfig, seed: Optional[int] = None) -> RunSetup:
    """
    Resolve grid, coefficients, potential, data and psi0 of a run.

    Raises:
        ConfigError: missing sections or bad built-in parameters
        ValidationError: Neumann compatibility of psi0 with h2
    """
    grid = build_grid(config)
    coeffs = build_coefficients(config.coefficients, grid.dimension)
    potential = potential_from_block(config.potential)

    initial = get_initial_condition(config.initial.psi0)
    manufactured = None
    if config.initial.psi0.name == "manufactured":
        manufactured = ManufacturedCase(coeffs, potential, grid.extents)
    data = build_source_data(config.data, manufactured)
    check_compatibility(initial, data, grid)

    seed = config.output.seed if seed is None else seed
    psi0 = CellField(grid, initial.values(grid, seed))
    shift = 0.0
    if config.initial.shift_mean:
        psi0, potential, shift = with_shifted_mean(psi0, potential)

    growth = validate_growth(potential, n=3, lambda1=neumann_lambda1(grid))
    logger.info(
        "Run resolved",
        dimension=grid.dimension,
        cells=list(grid.cells),
        mode=coeffs.mode.value,
        potential=potential.kind.value,
        homogeneous=data.homogeneous,
        mean_shift=shift,
    )
    return RunSetup(config=config, grid=grid, coeffs=coeffs, potential=potential, data=data,
                    initial=initial, psi0=psi0, growth=growth, mean_shift=shift,
                    manufactured=manufactured)


def make_simulation(setup: RunSetup, **callbacks) -> Simulation:
    if setup.config.time is None:
        raise ConfigError("invalid configuration", [{"key": "time", "message": "missing mandatory section [time]"}])
    time = setup.config.time
    return Simulation(
        coeffs=setup.coeffs,
        potential=setup.potential,
        data=setup.data,
        tau=time.tau,
        steps=time.steps,
        tol_rate=time.steady_tol_rate,
        tol_station=time.steady_tol_station,
        window=time.steady_window,
        picard=time.picard,
        growth=setup.growth,
        snapshot_every=setup.config.output.snapshot_every,
        **callbacks,
    )
