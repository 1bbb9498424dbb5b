"""Scan report assembly and serialization.

Reports redact matched text by default (a PII report should not itself
leak PII); ``redact=False`` opts out. JSON output is stable-key-ordered
for diffing; CSV output is the flat per-detection table. ms-per-MB uses
MiB (1,048,576 bytes) and is rounded to 2 decimals. ``stable=True``
zeroes the wall-clock fields so repeated runs byte-compare equal.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline import CorpusResult

SCHEMA_VERSION = "1"
_MIB = 1_048_576


@dataclass
class ScanReport:
    schema_version: str
    glossary_version: str
    workers: int
    files: list[dict]
    aggregate: dict
    diagnostics: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "glossary_version": self.glossary_version,
            "workers": self.workers,
            "files": self.files,
            "aggregate": self.aggregate,
            "diagnostics": self.diagnostics,
        }


def _ms_per_mb(elapsed_ms: float, size: int) -> float:
    if size <= 0:
        return 0.0
    return round(elapsed_ms / (size / _MIB), 2)


def build_report(result: "CorpusResult", redact: bool = True, stable: bool = False) -> ScanReport:
    """Shape a pipeline result into the serializable report."""
    files = []
    per_pattern: dict[str, int] = {}
    total_bytes = 0
    total_detections = 0
    for fr in result.files:
        total_bytes += fr.bytes_scanned
        total_detections += len(fr.detections)
        for det in fr.detections:
            per_pattern[det.pattern_id] = per_pattern.get(det.pattern_id, 0) + 1
        elapsed = 0.0 if stable else round(fr.elapsed_ms, 3)
        files.append(
            {
                "path": fr.path,
                "bytes": fr.bytes_scanned,
                "elapsed_ms": elapsed,
                "ms_per_mb": 0.0 if stable else _ms_per_mb(fr.elapsed_ms, fr.bytes_scanned),
                "detections": [det.to_dict(redact) for det in fr.detections],
                "diagnostics": [d.to_dict() for d in fr.diagnostics],
            }
        )
    aggregate = {
        "files": len(result.files),
        "bytes": total_bytes,
        "detections": total_detections,
        "detections_per_pattern": dict(sorted(per_pattern.items())),
        "stage_counters": result.counters.to_dict(),
        "elapsed_ms": 0.0 if stable else round(result.elapsed_ms, 3),
    }
    return ScanReport(
        schema_version=SCHEMA_VERSION,
        glossary_version=result.glossary_version,
        workers=result.workers,
        files=files,
        aggregate=aggregate,
        diagnostics=[d.to_dict() for d in result.diagnostics],
    )


def write_report(report: ScanReport, format: str = "json") -> bytes:
    """Serialize; JSON is deterministic (sorted keys), CSV is one row per
    detection."""
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2).encode("utf-8") + b"\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["path", "pattern_id", "start", "end", "confidence", "stage", "text"])
        for entry in report.files:
            for det in entry["detections"]:
                writer.writerow(
                    [
                        entry["path"],
                        det["pattern_id"],
                        det["start"],
                        det["end"],
                        det["confidence"],
                        det["stage"],
                        det["text"],
                    ]
                )
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {format!r} (expected 'json' or 'csv')")


def load_schema() -> dict:
    """The JSON schema shipped with the package (reports validate against it)."""
    text = resources.files("piiscan").joinpath("schemas/scan_report.schema.json").read_text("utf-8")
    return json.loads(text)
