"""Streaming diagnostics CSV."""

from pathlib import Path
from typing import IO, Optional, Union

from chgsim.core.exceptions import OutputError
from chgsim.models import DIAGNOSTICS_COLUMNS, DiagnosticsRecord
from chgsim.storage.base import BaseWriter, format_row


class DiagnosticsWriter(BaseWriter):
    """One row per step, flushed as it is written; columns in DIAGNOSTICS_COLUMNS order."""

    file_name = "diagnostics.csv"

    def __init__(self, out_dir: Union[str, Path]):
        super().__init__(out_dir)
        self._handle: Optional[IO[str]] = None
        self.rows = 0

    def open(self) -> "DiagnosticsWriter":
        self._prepare(self.path)
        try:
            self._handle = self.path.open("w", encoding="utf-8", newline="")
        except OSError as exc:
            raise OutputError(str(self.path), str(exc)) from exc
        self._handle.write(",".join(DIAGNOSTICS_COLUMNS) + "\n")
        return self

    def write(self, record: DiagnosticsRecord) -> None:
        if self._handle is None:
            self.open()
        self._handle.write(format_row(record.row()) + "\n")
        self._handle.flush()
        self.rows += 1

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "DiagnosticsWriter":
        return self.open()

    def __exit__(self, *exc) -> None:
        self.close()
