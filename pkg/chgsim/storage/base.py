"""Base writer with the common file handling of the output layer."""

from pathlib import Path
from typing import Any, Iterable, List, Optional, Union

from chgsim.config import settings
from chgsim.core.exceptions import OutputError
from chgsim.core.logger import logger


def format_number(value: Any) -> str:
    """Floats with CSV_FLOAT_DIGITS significant digits; everything else as str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{settings.CSV_FLOAT_DIGITS}g")
    if value is None:
        return ""
    return str(value)


def format_row(values: Iterable[Any]) -> str:
    return ",".join(format_number(v) for v in values)


class BaseWriter:
    """Writer bound to one file name inside an output directory."""

    file_name: Optional[str] = None

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def _ensure_file_name(self) -> str:
        if not self.file_name:
            raise ValueError(f"file_name must be defined in {type(self).__name__}")
        return self.file_name

    @property
    def path(self) -> Path:
        return self.out_dir / self._ensure_file_name()

    def _prepare(self, path: Path) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(str(path.parent), str(exc)) from exc

    def write_lines(self, lines: List[str], path: Optional[Path] = None) -> Path:
        """Write whole lines to ``path`` (the writer's own file by default)."""
        target = path or self.path
        self._prepare(target)
        try:
            target.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        except OSError as exc:
            raise OutputError(str(target), str(exc)) from exc
        logger.debug("Wrote output file", path=str(target), lines=len(lines))
        return target
