"""Sweep worker running independent simulations across a parameter list."""

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

from chgsim.config import settings
from chgsim.core.exceptions import ChgError
from chgsim.core.logger import logger
from chgsim.models import RunConfig, RunStatus, SweepRow
from chgsim.services.config_parser import set_path
from chgsim.services.run_setup import build_run, make_simulation

SWEEP_COLUMNS = [
    "value",
    "status",
    "error_code",
    "steps",
    "t",
    "mass",
    "energy",
    "mean_mu",
    "energy_identity_residual",
    "mass_balance_residual",
    "steady",
]


def run_single(config: RunConfig, param: str, value: float, seed: Optional[int] = None) -> SweepRow:
    """
    One sweep entry; never raises.

    Runs in a worker process, so the arguments and the result are plain
    picklable models.
    """
    try:
        setup = build_run(set_path(config, param, value), seed)
        result = make_simulation(setup).run(setup.psi0)
    except ChgError as exc:
        return SweepRow(value=value, status=RunStatus.FAILED, error_code=exc.code)
    except Exception as exc:
        logger.error("Sweep run crashed", param=param, value=value, error=str(exc))
        return SweepRow(value=value, status=RunStatus.FAILED, error_code="INTERNAL_ERROR")

    last = result.last_record
    return SweepRow(
        value=value,
        status=RunStatus.OK,
        steps=result.state.step,
        t=result.state.t,
        mass=last.mass,
        energy=last.energy,
        mean_mu=last.mean_mu,
        energy_identity_residual=last.energy_identity_residual,
        mass_balance_residual=last.mass_balance_residual,
        steady=result.steady,
    )


class SweepWorker:
    """Runs sweep entries concurrently and collects their final diagnostics."""

    def __init__(self, max_workers: Optional[int] = None, use_processes: bool = True):
        self.max_workers = max_workers or settings.SWEEP_MAX_WORKERS
        self.use_processes = use_processes
        self.run_count = 0

    def _executor(self) -> Executor:
        if self.use_processes:
            return ProcessPoolExecutor(max_workers=self.max_workers)
        return ThreadPoolExecutor(max_workers=self.max_workers)

    async def run(
        self,
        config: RunConfig,
        param: str,
        values: Sequence[float],
        seed: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Run one simulation per value.

        Returns:
            Statistics dict with the rows ordered by parameter value
        """
        self.run_count += 1
        started = datetime.utcnow()
        logger.info("Starting sweep", param=param, runs=len(values), workers=self.max_workers)

        loop = asyncio.get_running_loop()
        with self._executor() as executor:
            futures = [
                loop.run_in_executor(executor, run_single, config, param, float(value), seed)
                for value in values
            ]
            rows: List[SweepRow] = list(await asyncio.gather(*futures))

        rows.sort(key=lambda row: row.value)
        failed = sum(1 for row in rows if row.status == RunStatus.FAILED)
        elapsed = (datetime.utcnow() - started).total_seconds()
        logger.info("Sweep completed", param=param, runs=len(rows), failed=failed, seconds=elapsed)
        return {
            "sweep_number": self.run_count,
            "param": param,
            "runs": len(rows),
            "failed": failed,
            "seconds": elapsed,
            "rows": rows,
        }


def sweep_table(rows: Sequence[SweepRow]) -> List[List[Any]]:
    """Rows in SWEEP_COLUMNS order for the CSV writer."""
    table = []
    for row in rows:
        data = row.model_dump()
        data["status"] = row.status.value
        table.append([data[name] for name in SWEEP_COLUMNS])
    return table
