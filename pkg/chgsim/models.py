"""Pydantic models for run configuration, diagnostics and reports."""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from chgsim.services.coefficients.base import CoefficientMode
from chgsim.services.grid import BcKind


# =====================================
# ENUMS
# =====================================


class PotentialKind(str, Enum):
    """Built-in potential families."""

    DOUBLE_WELL = "double_well"
    QUARTIC_GENERAL = "quartic_general"
    POLYNOMIAL = "polynomial"


class Verdict(str, Enum):
    """Outcome of one check or scan entry."""

    PASS = "pass"
    FAIL = "fail"
    INFO = "info"
    SKIPPED = "skipped"


class RunStatus(str, Enum):
    """Status of one sweep run."""

    OK = "ok"
    FAILED = "failed"


# =====================================
# CONFIG BLOCKS
# =====================================


class Block(BaseModel):
    """Base for config sections: unknown keys are errors."""

    model_config = ConfigDict(extra="forbid")


class BuiltinRef(Block):
    """Reference to a registry built-in: ``name`` or ``name(key=value, ...)``."""

    name: str
    params: Dict[str, Any] = Field(default_factory=dict)


class GridBlock(Block):
    dimension: int
    extents: List[float]
    cells: List[int]
    bc_kind: BcKind = BcKind.NEUMANN_HOMOGENEOUS

    @field_validator("dimension")
    @classmethod
    def check_dimension(cls, v: int) -> int:
        if v not in (1, 2):
            raise ValueError("grid.dimension must be 1 or 2")
        return v

    @field_validator("extents")
    @classmethod
    def check_extents(cls, v: List[float]) -> List[float]:
        if any(x <= 0.0 for x in v):
            raise ValueError("grid.extents must be positive")
        return v

    @field_validator("cells")
    @classmethod
    def check_cells(cls, v: List[int]) -> List[int]:
        if any(n < 4 for n in v):
            raise ValueError("grid.cells must be at least 4 per axis")
        return v

    @model_validator(mode="after")
    def check_lengths(self) -> "GridBlock":
        if len(self.extents) != self.dimension or len(self.cells) != self.dimension:
            raise ValueError("grid.extents and grid.cells need one entry per axis")
        return self


class CoefficientsBlock(Block):
    beta: float = 1.0
    a: Optional[BuiltinRef] = None
    c: Optional[BuiltinRef] = None
    b: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="constant", params={"value": 1.0}))
    mode: CoefficientMode = CoefficientMode.SEMILINEAR

    @field_validator("beta")
    @classmethod
    def check_beta(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError("coefficients.beta must be positive")
        return v


class PotentialBlock(Block):
    kind: PotentialKind = PotentialKind.DOUBLE_WELL
    alpha: float = 1.0
    kappa: float = -1.0
    xi: float = 0.0
    coeffs: Optional[List[float]] = None
    stabilization: Optional[float] = None
    scan_range: float = 10.0
    eta: Optional[float] = None

    @field_validator("stabilization")
    @classmethod
    def check_stabilization(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v < 0.0:
            raise ValueError("potential.stabilization must be nonnegative")
        return v

    @field_validator("scan_range")
    @classmethod
    def check_scan_range(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError("potential.scan_range must be positive")
        return v

    @model_validator(mode="after")
    def check_coeffs(self) -> "PotentialBlock":
        if self.kind == PotentialKind.POLYNOMIAL and not self.coeffs:
            raise ValueError("potential.coeffs is required for kind = polynomial")
        return self


class TimeBlock(Block):
    tau: float
    steps: int
    steady_tol_rate: float = 1e-8
    steady_tol_station: float = 1e-6
    steady_window: int = 50
    picard: bool = False

    @field_validator("tau")
    @classmethod
    def check_tau(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError("time.tau must be positive")
        return v

    @field_validator("steps", "steady_window")
    @classmethod
    def check_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class InitialBlock(Block):
    psi0: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="uniform", params={"value": 0.0}))
    shift_mean: bool = False


class DataBlock(Block):
    f: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="zero"))
    g: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="zero"))
    h1: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="zero"))
    h2: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="zero"))


class OutputBlock(Block):
    dir: str = "out"
    snapshot_every: int = 0
    seed: int = 0

    @field_validator("snapshot_every")
    @classmethod
    def check_snapshot_every(cls, v: int) -> int:
        if v < 0:
            raise ValueError("output.snapshot_every must be nonnegative")
        return v


class SymbolBlock(Block):
    preset: Optional[str] = None
    beta: float = 1.0
    a: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    c: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    B: Optional[List[float]] = None
    phi: float = 0.55
    rays: Optional[int] = None
    lambda_moduli: Optional[int] = None
    xi_directions: Optional[int] = None
    xi_moduli: Optional[int] = None
    mikhlin: bool = True
    max_angle: bool = True

    @field_validator("phi")
    @classmethod
    def check_phi(cls, v: float) -> float:
        if not 0.5 < v < 1.0:
            raise ValueError("symbol.phi is a fraction of pi in (0.5, 1)")
        return v


class ExtendBlock(Block):
    vector: BuiltinRef = Field(default_factory=lambda: BuiltinRef(name="rotation", params={"omega": 1.0}))
    scalar: Optional[BuiltinRef] = None
    dimension: int = 2
    radius: float = 1.0
    outer: float = 3.0
    points: int = 16
    refinements: List[int] = Field(default_factory=lambda: [16, 32, 64])
    radii: List[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1])

    @field_validator("radius", "outer")
    @classmethod
    def check_radius(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError("must be positive")
        return v

    @field_validator("dimension")
    @classmethod
    def check_dimension(cls, v: int) -> int:
        if v not in (2, 3):
            raise ValueError("extend.dimension must be 2 or 3")
        return v


class SweepBlock(Block):
    param: str
    values: List[float]


class RunConfig(BaseModel):
    """A fully validated run configuration."""

    model_config = ConfigDict(extra="forbid")

    grid: Optional[GridBlock] = None
    coefficients: CoefficientsBlock = Field(default_factory=CoefficientsBlock)
    potential: PotentialBlock = Field(default_factory=PotentialBlock)
    time: Optional[TimeBlock] = None
    initial: InitialBlock = Field(default_factory=InitialBlock)
    data: DataBlock = Field(default_factory=DataBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
    symbol: Optional[SymbolBlock] = None
    extend: Optional[ExtendBlock] = None
    sweep: Optional[SweepBlock] = None


# =====================================
# DIAGNOSTICS
# =====================================

DIAGNOSTICS_COLUMNS = [
    "step",
    "t",
    "mass",
    "energy",
    "dE_dt",
    "diss_beta",
    "diss_cross",
    "diss_mobility",
    "mean_mu",
    "mean_mu_residual",
    "energy_identity_residual",
    "stationary_residual",
    "mass_balance_residual",
]


class DiagnosticsRecord(BaseModel):
    """One row of the conservation and energy ledger."""

    step: int
    t: float
    mass: float
    energy: float
    dE_dt: float = 0.0
    diss_beta: float = 0.0
    diss_cross: float = 0.0
    diss_mobility: float = 0.0
    mean_mu: float
    mean_mu_residual: float
    energy_identity_residual: float = 0.0
    stationary_residual: float
    mass_balance_residual: float = 0.0

    # in-memory only
    rate_psi: float = 0.0
    rate_mu: float = 0.0
    numerical_dissipation: float = 0.0
    potential_remainder: float = 0.0
    epsilon: Optional[float] = None
    coefficients_ok: Optional[bool] = None
    energy_lower_margin: Optional[float] = None
    dissipation_ok: Optional[bool] = None
    max_update: float = 0.0

    def row(self) -> List[Any]:
        return [getattr(self, name) for name in DIAGNOSTICS_COLUMNS]


# =====================================
# REPORTS
# =====================================


class ReportRow(BaseModel):
    """One line of a check or scan report."""

    scan: str
    quantity: str
    value: float
    location: str = ""
    verdict: Verdict = Verdict.INFO


class CoefficientReport(BaseModel):
    epsilon: float
    epsilon_location: List[float] = Field(default_factory=list)
    rows: List[ReportRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.verdict != Verdict.FAIL for row in self.rows)


class GrowthReport(BaseModel):
    """Desk-scale certificate of the growth conditions on the potential."""

    scan_range: float
    dimension: int
    degree: int
    eta: float
    eta_required: float
    c0: float
    theta: float
    c1: float
    c2: float
    c3: float
    alpha: float
    gamma: float
    lambda1: Optional[float] = None
    analytic: bool = True
    witnesses: Dict[str, float] = Field(default_factory=dict)
    rows: List[ReportRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.verdict != Verdict.FAIL for row in self.rows)


class EquilibriumReport(BaseModel):
    """Outcome of steady-state detection."""

    detected: bool
    step: int
    t: float
    mu_inf: float
    mu_deviation: float
    stationary_residual: float
    rate_psi: float
    rate_mu: float
    energy: float
    mean_psi: float
    decay_exponent: Optional[float] = None
    analytic_potential: bool = True
    psi: List[float] = Field(default_factory=list)


class SweepRow(BaseModel):
    """Final diagnostics of one sweep run."""

    value: float
    status: RunStatus
    error_code: str = ""
    steps: int = 0
    t: float = 0.0
    mass: float = 0.0
    energy: float = 0.0
    mean_mu: float = 0.0
    energy_identity_residual: float = 0.0
    mass_balance_residual: float = 0.0
    steady: bool = False
