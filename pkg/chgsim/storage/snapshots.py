"""Field snapshots: '#' header lines, then one CSV row per cell in row-major order."""

from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from chgsim.core.exceptions import ValidationError
from chgsim.services.grid import GridSpec
from chgsim.storage.base import BaseWriter, format_number, format_row

FORMAT_VERSION = 1


class SnapshotWriter(BaseWriter):
    """Writes snapshot_<step>.csv files with columns x(, y), psi, mu."""

    file_name = "snapshots"

    def __init__(self, out_dir: Union[str, Path]):
        super().__init__(out_dir)
        self.written = 0

    def snapshot_path(self, step: int) -> Path:
        return self.path / f"snapshot_{step:06d}.csv"

    def write(self, state) -> Path:
        grid: GridSpec = state.grid
        header = [
            f"# format {FORMAT_VERSION}",
            "# dims " + " ".join(str(n) for n in grid.cells),
            "# extents " + " ".join(format_number(float(v)) for v in grid.extents),
            f"# t {format_number(float(state.t))}",
            f"# step {state.step}",
        ]
        axes = ["x", "y"][: grid.dimension]
        columns = [",".join(axes + ["psi", "mu"])]
        centres = [c.ravel() for c in grid.cell_centers()]
        psi, mu = state.psi.flat, state.mu.flat
        rows = [
            format_row([float(c[k]) for c in centres] + [float(psi[k]), float(mu[k])])
            for k in range(grid.n_cells)
        ]
        self.written += 1
        return self.write_lines(header + columns + rows, self.snapshot_path(state.step))


def read_snapshot(path: Union[str, Path]) -> Tuple[Dict[str, str], np.ndarray, np.ndarray]:
    """
    Read a snapshot back.

    Returns:
        (header entries, psi, mu) with psi and mu shaped to the stored dims
    """
    header: Dict[str, str] = {}
    data_lines = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value
        elif line and not line[0].isalpha():
            data_lines.append([float(v) for v in line.split(",")])
    if "dims" not in header:
        raise ValidationError("snapshot without a dims header", {"path": str(path)})
    dims = tuple(int(n) for n in header["dims"].split())
    table = np.asarray(data_lines)
    return header, table[:, -2].reshape(dims), table[:, -1].reshape(dims)
