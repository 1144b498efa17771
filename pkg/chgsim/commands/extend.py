"""extend: extension samples outside the ball and the divergence certificate."""

from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from chgsim.core.logger import logger
from chgsim.models import ExtendBlock, RunConfig
from chgsim.services.coefficients import get_scalar_field, get_vector_field
from chgsim.services.extension import (
    ball_sample,
    continuity_jump,
    deviation_table,
    extend_divfree,
    extend_reflect,
    extension_divergence_study,
    query_points,
)
from chgsim.storage import ReportWriter

AXES = ("x", "y", "z")


def cmd_extend(config: RunConfig, out_dir: Union[str, Path]) -> int:
    """
    Write extension_samples.csv and extension_summary.json.

    Returns:
        0 (failures of the divergence study are reported, not raised)
    """
    block = config.extend or ExtendBlock()
    n = block.dimension
    vector = get_vector_field(block.vector.name, **block.vector.params)
    sample = ball_sample(vector, block.radius, n)
    scalar_sample = None
    if block.scalar is not None:
        scalar = get_scalar_field(block.scalar.name, **block.scalar.params)
        scalar_sample = ball_sample(scalar, block.radius, n)

    columns = list(AXES[:n]) + [f"a{k + 1}" for k in range(n)] + ["inside"]
    if scalar_sample is not None:
        columns.append("b")
    rows: List[List[Any]] = []
    for x in query_points(block.radius, n, directions=block.points):
        row = [float(v) for v in x] + [float(v) for v in extend_divfree(sample, x)]
        row.append(bool(np.linalg.norm(x) <= block.radius))
        if scalar_sample is not None:
            row.append(extend_reflect(scalar_sample, x))
        rows.append(row)

    reports = ReportWriter(out_dir)
    reports.table("extension_samples.csv", columns, rows)

    study = extension_divergence_study(sample, block.outer, block.refinements)
    summary: Dict[str, Any] = {
        "field": vector.describe(),
        "dimension": n,
        "radius": block.radius,
        "continuity_jump": continuity_jump(sample, directions=block.points),
        "divergence_study": study,
        "deviation": deviation_table(vector, block.radii, n),
    }
    if scalar_sample is not None:
        summary["scalar_deviation"] = deviation_table(scalar, block.radii, n, vector=False)
    reports.json("extension_summary.json", summary)

    logger.info(
        "Extend command finished",
        samples=len(rows),
        max_divergence=study[-1]["max_divergence"] if study else None,
        continuity_jump=summary["continuity_jump"],
    )
    print(f"samples={len(rows)} continuity_jump={summary['continuity_jump']:.3g}")
    for level in study:
        print(f"cells={int(level['cells'])} max_divergence={level['max_divergence']:.3g}"
              f" order={level['order']:.3g}")
    return 0
