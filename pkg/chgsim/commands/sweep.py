"""sweep: independent runs over one parameter, collected into sweep.csv."""

import asyncio
from pathlib import Path
from typing import Optional, Sequence, Union

from chgsim.core.exceptions import ConfigError
from chgsim.models import RunConfig
from chgsim.storage import ReportWriter
from chgsim.workers.sweep_worker import SWEEP_COLUMNS, SweepWorker, sweep_table


def cmd_sweep(
    config: RunConfig,
    out_dir: Union[str, Path],
    param: Optional[str] = None,
    values: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
) -> int:
    """
    Flags take precedence over the [sweep] section.

    Returns:
        0; failed runs appear as rows with status failed
    """
    if param is None and config.sweep is not None:
        param = config.sweep.param
    if values is None and config.sweep is not None:
        values = config.sweep.values
    if not param or not values:
        raise ConfigError(
            "invalid configuration",
            [{"key": "sweep", "message": "sweep needs a parameter and values ([sweep] or --param/--values)"}],
        )

    stats = asyncio.run(SweepWorker().run(config, param, values, seed))
    ReportWriter(out_dir).table("sweep.csv", SWEEP_COLUMNS, sweep_table(stats["rows"]))
    print(f"param={param} runs={stats['runs']} failed={stats['failed']}")
    return 0
