"""symbol-scan: sector, bound, zero-set and Mikhlin scans of the constant-coefficient symbol."""

from pathlib import Path
from typing import Union

from chgsim.commands.check import print_rows
from chgsim.core.logger import logger
from chgsim.models import RunConfig, SymbolBlock, Verdict
from chgsim.services.symbol import make_sector_grid, params_from_block, symbol_report
from chgsim.storage import ReportWriter


def cmd_symbol_scan(config: RunConfig, out_dir: Union[str, Path]) -> int:
    """
    Write symbol_report.csv from the [symbol] section (defaults when absent).

    Returns:
        0 when every scan passes, 2 otherwise
    """
    block = config.symbol or SymbolBlock()
    params = params_from_block(block)
    grid = make_sector_grid(
        params.n,
        block.phi,
        rays=block.rays,
        lambda_moduli=block.lambda_moduli,
        xi_directions=block.xi_directions,
        xi_moduli=block.xi_moduli,
    )
    rows = symbol_report(params, grid, mikhlin=block.mikhlin, max_angle=block.max_angle)

    ReportWriter(out_dir).report_rows("symbol_report.csv", rows)
    print_rows(rows)

    failures = [f"{row.scan}.{row.quantity}" for row in rows if row.verdict == Verdict.FAIL]
    logger.info("Symbol scan command finished", rows=len(rows), failures=failures)
    return 2 if failures else 0
