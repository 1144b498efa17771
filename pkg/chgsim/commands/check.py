"""check: coefficient, growth and compatibility validators without time stepping."""

from pathlib import Path
from typing import List, Optional, Union

from chgsim.core.exceptions import ValidationError
from chgsim.core.logger import logger
from chgsim.models import ReportRow, RunConfig, Verdict
from chgsim.services.coefficients import CoefficientMode
from chgsim.services.coefficients.validators import validate_coefficients
from chgsim.services.grid import CellField, neumann_lambda1
from chgsim.services.manufactured import ManufacturedCase
from chgsim.services.potential import potential_from_block, validate_growth
from chgsim.services.run_setup import build_coefficients, build_grid
from chgsim.services.sources import build_source_data, check_compatibility, get_initial_condition
from chgsim.storage import ReportWriter


def _compatibility_row(config: RunConfig, initial, data, grid) -> ReportRow:
    try:
        mismatch = check_compatibility(initial, data, grid)
    except ValidationError as exc:
        return ReportRow(scan="data", quantity="neumann_compatibility",
                         value=float(exc.details.get("mismatch", float("nan"))), verdict=Verdict.FAIL)
    return ReportRow(scan="data", quantity="neumann_compatibility", value=mismatch,
                     location=config.initial.psi0.name, verdict=Verdict.PASS)


def print_rows(rows: List[ReportRow]) -> None:
    for row in rows:
        where = f"  @ {row.location}" if row.location else ""
        print(f"{row.scan:<14} {row.quantity:<26} {row.value:>14.6g}  {row.verdict.value}{where}")


def cmd_check(config: RunConfig, out_dir: Union[str, Path], seed: Optional[int] = None) -> int:
    """
    Write check_report.csv.

    Returns:
        0 when every row passes, 2 when any row fails
    """
    grid = build_grid(config)
    coeffs = build_coefficients(config.coefficients, grid.dimension)
    potential = potential_from_block(config.potential)

    initial = get_initial_condition(config.initial.psi0)
    psi0 = CellField(grid, initial.values(grid, config.output.seed if seed is None else seed))
    frozen_at = psi0 if coeffs.mode == CoefficientMode.QUASILINEAR else None

    rows = list(validate_coefficients(coeffs, grid, frozen_at).rows)
    rows.extend(validate_growth(potential, n=3, lambda1=neumann_lambda1(grid)).rows)

    manufactured = None
    if config.initial.psi0.name == "manufactured":
        manufactured = ManufacturedCase(coeffs, potential, grid.extents)
    data = build_source_data(config.data, manufactured)
    rows.append(_compatibility_row(config, initial, data, grid))

    ReportWriter(out_dir).report_rows("check_report.csv", rows)
    print_rows(rows)

    failures = [f"{row.scan}.{row.quantity}" for row in rows if row.verdict == Verdict.FAIL]
    logger.info("Check command finished", rows=len(rows), failures=failures)
    return 2 if failures else 0
