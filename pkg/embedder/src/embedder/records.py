"""Bug-report records and the CSV schema they arrive in."""

import csv
from dataclasses import dataclass


class ReportSchemaError(ValueError):
    """The reports CSV is missing a column, a field, or holds a bad label."""


REQUIRED_COLUMNS = ("id", "summary", "description", "label")


@dataclass(frozen=True)
class BugReportRecord:
    id: str
    summary: str
    description: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ReportSchemaError(f"label must be 0 or 1, got {self.label!r}")


def ingest_csv(path) -> list[BugReportRecord]:
    """Read records in file order.

    The header must name id, summary, description and label; extra columns
    are ignored. Summary and description may be empty strings but a row must
    carry all four fields.
    """
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ReportSchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        records = []
        for i, row in enumerate(reader, start=1):
            if any(row[c] is None for c in REQUIRED_COLUMNS):
                raise ReportSchemaError(f"{path}: record {i}: too few fields")
            raw = row["label"].strip()
            if raw not in ("0", "1"):
                raise ReportSchemaError(
                    f"{path}: record {i}: label must be 0 or 1, got {raw!r}"
                )
            records.append(
                BugReportRecord(
                    id=row["id"],
                    summary=row["summary"],
                    description=row["description"],
                    label=int(raw),
                )
            )
    return records
