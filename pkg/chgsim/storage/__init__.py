"""Output writers for diagnostics, snapshots and reports."""

from chgsim.storage.diagnostics import DiagnosticsWriter
from chgsim.storage.reports import ReportWriter
from chgsim.storage.snapshots import SnapshotWriter, read_snapshot

__all__ = ["DiagnosticsWriter", "ReportWriter", "SnapshotWriter", "read_snapshot"]
