"""JSON and CSV reports."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from pydantic import BaseModel

from chgsim.models import ReportRow
from chgsim.storage.base import BaseWriter, format_row

REPORT_COLUMNS = ["scan", "quantity", "value", "location", "verdict"]


class ReportWriter(BaseWriter):
    """Writes named reports into the output directory."""

    file_name = "report.csv"

    def __init__(self, out_dir: Union[str, Path]):
        super().__init__(out_dir)

    def json(self, name: str, payload: Union[BaseModel, Dict[str, Any]]) -> Path:
        data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
        text = json.dumps(data, indent=2, sort_keys=True, allow_nan=True)
        return self.write_lines([text], self.out_dir / name)

    def table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        lines = [",".join(columns)] + [format_row(row) for row in rows]
        return self.write_lines(lines, self.out_dir / name)

    def report_rows(self, name: str, rows: List[ReportRow]) -> Path:
        """Check or scan rows; location fields are quoted when they contain commas."""
        def cell(row: ReportRow) -> List[Any]:
            location = f'"{row.location}"' if "," in row.location else row.location
            return [row.scan, row.quantity, float(row.value), location, row.verdict.value]

        return self.table(name, REPORT_COLUMNS, (cell(row) for row in rows))
