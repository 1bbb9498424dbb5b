"""piiscan: glossary-driven sensitive-data detection.

Compiles a pattern glossary into a single-pass multi-pattern DFA,
corroborates matches with keyword proximity and type validators, scores
each detection, and optionally folds in a pluggable NER rescan.

The quickest entry points:

>>> from piiscan import SensitiveTextDetector
>>> det = SensitiveTextDetector(glossary="glossaries/default.yaml").fit()
>>> det.transform(["my ssn is 123-45-6789"])  # doctest: +SKIP

or the ``piiscan`` CLI (``scan``, ``check-config``, ``bench``).
"""

__version__ = "0.1.0"

from .glossary import (
    Glossary,
    GlossaryError,
    PatternSpec,
    PatternType,
    glossary_stats,
    load_glossary,
    loads,
    save_glossary,
)
from .pipeline import (
    CompiledGlossary,
    Detection,
    ScanOptions,
    compile_glossary,
    merge_detections,
    scan_corpus,
    scan_unit,
)
from .estimator import SensitiveTextDetector
from .ner import MockNerPlugin, NerEntity, SubprocessNerPlugin
from .report import build_report, write_report

__all__ = [
    "__version__",
    "Glossary",
    "GlossaryError",
    "PatternSpec",
    "PatternType",
    "glossary_stats",
    "load_glossary",
    "loads",
    "save_glossary",
    "CompiledGlossary",
    "Detection",
    "ScanOptions",
    "compile_glossary",
    "merge_detections",
    "scan_corpus",
    "scan_unit",
    "SensitiveTextDetector",
    "MockNerPlugin",
    "NerEntity",
    "SubprocessNerPlugin",
    "build_report",
    "write_report",
]
