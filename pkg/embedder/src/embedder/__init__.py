"""Frozen-transformer embedding of bug-report text into vector files."""

from .encode import DEFAULT_CHECKPOINT, MAX_TOKENS, VectorSet, embed_reports
from .records import REQUIRED_COLUMNS, BugReportRecord, ReportSchemaError, ingest_csv
from .vectors import FORMAT_VERSION, MAGIC, write_vectors

__all__ = [
    "BugReportRecord",
    "DEFAULT_CHECKPOINT",
    "FORMAT_VERSION",
    "MAGIC",
    "MAX_TOKENS",
    "REQUIRED_COLUMNS",
    "ReportSchemaError",
    "VectorSet",
    "embed_reports",
    "ingest_csv",
    "write_vectors",
]

__version__ = "0.1.0"
