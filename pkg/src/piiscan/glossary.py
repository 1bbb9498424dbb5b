"""Pattern glossary: the configuration that drives every detection stage.

A glossary is a YAML document listing pattern entries. Each entry binds one
or more regex surface forms to a validator type, contextual keywords and
scoring parameters. Loading is strict: unknown keys, duplicate ids and
regexes outside the supported dialect are errors, not warnings.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, IO

import yaml

DEFAULT_D_MAX = 50
DEFAULT_ALPHA = 2.0
DEFAULT_VALIDATION_SCORE = 30.0
DEFAULT_THRESHOLD = 50.0
DEFAULT_VERSION = "1"


class PatternType(enum.Enum):
    """Validator binding for a pattern. ``GENERIC`` always validates."""

    CREDIT_CARD = "credit_card"
    SSN = "ssn"
    EMAIL = "email"
    PHONE = "phone"
    IBAN = "iban"
    POSTAL_CODE = "postal_code"
    DATE_OF_BIRTH = "date_of_birth"
    TIN = "tin"
    GENERIC = "generic"


class GlossaryError(ValueError):
    """Base class for glossary load failures."""


class GlossaryParseError(GlossaryError):
    """The document is not well-formed YAML or has the wrong shape."""


class GlossaryValidationError(GlossaryError):
    """A pattern entry violates a glossary invariant."""


class GlossaryRangeError(GlossaryError):
    """A numeric field is outside its allowed range."""


@dataclass(frozen=True)
class PatternSpec:
    """One glossary entry.

    ``regexes`` holds every surface form of the pattern (an SSN may appear
    standard, compact or masked); all forms share the id, validator and
    scoring parameters.
    """

    id: str
    name: str
    regexes: tuple[str, ...]
    pattern_type: PatternType = PatternType.GENERIC
    must_keywords: tuple[str, ...] = ()
    should_keywords: tuple[str, ...] = ()
    d_max: int = DEFAULT_D_MAX
    alpha: float = DEFAULT_ALPHA
    validation_score: float = DEFAULT_VALIDATION_SCORE
    threshold: float = DEFAULT_THRESHOLD

    def keywords(self) -> list[tuple[str, str]]:
        """All keywords as (keyword, role) pairs, must first."""
        out = [(k, "must") for k in self.must_keywords]
        out.extend((k, "should") for k in self.should_keywords)
        return out

    def max_score(self) -> float:
        """Upper bound of the confidence ledger for this pattern."""
        return self.alpha * self.d_max + self.validation_score


@dataclass(frozen=True)
class Glossary:
    patterns: tuple[PatternSpec, ...]
    version: str = DEFAULT_VERSION

    def by_id(self, pattern_id: str) -> PatternSpec:
        for spec in self.patterns:
            if spec.id == pattern_id:
                return spec
        raise KeyError(pattern_id)


_PATTERN_KEYS = {
    "id",
    "name",
    "regexes",
    "pattern_type",
    "must_keywords",
    "should_keywords",
    "d_max",
    "alpha",
    "validation_score",
    "threshold",
}
_TOP_KEYS = {"version", "patterns"}


def _require_str_list(value: Any, what: str, pattern_id: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise GlossaryValidationError(f"pattern {pattern_id!r}: {what} must be a list of strings")
    for v in value:
        if not v:
            raise GlossaryValidationError(f"pattern {pattern_id!r}: empty string in {what}")
    return tuple(value)


def _parse_pattern(entry: Any, index: int) -> PatternSpec:
    if not isinstance(entry, dict):
        raise GlossaryParseError(f"patterns[{index}] is not a mapping")
    unknown = set(entry) - _PATTERN_KEYS
    if unknown:
        raise GlossaryValidationError(
            f"patterns[{index}]: unknown key(s) {sorted(unknown)} (typo protection; allowed keys: {sorted(_PATTERN_KEYS)})"
        )
    pattern_id = entry.get("id")
    if not isinstance(pattern_id, str) or not pattern_id:
        raise GlossaryValidationError(f"patterns[{index}]: missing or empty 'id'")

    regexes = entry.get("regexes")
    if not isinstance(regexes, list) or not regexes or not all(isinstance(r, str) for r in regexes):
        raise GlossaryValidationError(f"pattern {pattern_id!r}: 'regexes' must be a non-empty list of strings")

    type_raw = entry.get("pattern_type", "generic")
    try:
        pattern_type = PatternType(type_raw)
    except ValueError:
        allowed = [t.value for t in PatternType]
        raise GlossaryValidationError(
            f"pattern {pattern_id!r}: unknown pattern_type {type_raw!r} (allowed: {allowed})"
        ) from None

    must = _require_str_list(entry.get("must_keywords"), "must_keywords", pattern_id)
    should = _require_str_list(entry.get("should_keywords"), "should_keywords", pattern_id)
    overlap = set(k.lower() for k in must) & set(k.lower() for k in should)
    if overlap:
        raise GlossaryValidationError(
            f"pattern {pattern_id!r}: keyword(s) {sorted(overlap)} appear in both must_keywords and should_keywords"
        )

    d_max = entry.get("d_max", DEFAULT_D_MAX)
    if not isinstance(d_max, int) or isinstance(d_max, bool) or d_max <= 0:
        raise GlossaryRangeError(f"pattern {pattern_id!r}: d_max must be a positive integer, got {d_max!r}")
    alpha = entry.get("alpha", DEFAULT_ALPHA)
    if not isinstance(alpha, (int, float)) or isinstance(alpha, bool) or alpha < 0:
        raise GlossaryRangeError(f"pattern {pattern_id!r}: alpha must be a non-negative number, got {alpha!r}")
    validation_score = entry.get("validation_score", DEFAULT_VALIDATION_SCORE)
    if not isinstance(validation_score, (int, float)) or isinstance(validation_score, bool) or validation_score < 0:
        raise GlossaryRangeError(
            f"pattern {pattern_id!r}: validation_score must be a non-negative number, got {validation_score!r}"
        )
    threshold = entry.get("threshold", DEFAULT_THRESHOLD)
    if not isinstance(threshold, (int, float)) or isinstance(threshold, bool) or threshold < 0:
        raise GlossaryRangeError(f"pattern {pattern_id!r}: threshold must be a non-negative number, got {threshold!r}")

    name = entry.get("name", pattern_id)
    if not isinstance(name, str):
        raise GlossaryValidationError(f"pattern {pattern_id!r}: 'name' must be a string")

    return PatternSpec(
        id=pattern_id,
        name=name,
        regexes=tuple(regexes),
        pattern_type=pattern_type,
        must_keywords=must,
        should_keywords=should,
        d_max=d_max,
        alpha=float(alpha),
        validation_score=float(validation_score),
        threshold=float(threshold),
    )


def loads(text: str) -> Glossary:
    """Parse a glossary from YAML text. See :func:`load_glossary` for files."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise GlossaryParseError(f"malformed glossary document{where}: {exc}") from exc

    if not isinstance(doc, dict):
        raise GlossaryParseError("glossary document must be a mapping with a 'patterns' list")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise GlossaryValidationError(f"unknown top-level key(s) {sorted(unknown)}")
    raw_patterns = doc.get("patterns")
    if not isinstance(raw_patterns, list) or not raw_patterns:
        raise GlossaryParseError("glossary must contain a non-empty 'patterns' list")

    version = doc.get("version", DEFAULT_VERSION)
    if not isinstance(version, str):
        version = str(version)

    patterns = [_parse_pattern(entry, i) for i, entry in enumerate(raw_patterns)]

    seen: dict[str, int] = {}
    for i, spec in enumerate(patterns):
        if spec.id in seen:
            raise GlossaryValidationError(
                f"duplicate pattern id {spec.id!r} (entries {seen[spec.id]} and {i})"
            )
        seen[spec.id] = i

    glossary = Glossary(patterns=tuple(patterns), version=version)
    _check_dialect(glossary)
    return glossary


def _check_dialect(glossary: Glossary) -> None:
    # Compile every regex once so a loaded glossary is guaranteed to compile
    # downstream (dialect agreement is total).
    from .regexset import parser as _parser

    for spec in glossary.patterns:
        for r in spec.regexes:
            try:
                _parser.parse_regex(r)
            except _parser.UnsupportedConstructError as exc:
                raise GlossaryValidationError(
                    f"pattern {spec.id!r}: unsupported construct: {exc.construct} in regex {r!r}"
                ) from exc
            except _parser.RegexSyntaxError as exc:
                raise GlossaryValidationError(
                    f"pattern {spec.id!r}: invalid regex {r!r}: {exc}"
                ) from exc


def load_glossary(source: str | Path | IO[str]) -> Glossary:
    """Load a glossary from a file path or an open text stream."""
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return loads(source.read())
    return loads(Path(source).read_text(encoding="utf-8"))


def to_dict(glossary: Glossary) -> dict[str, Any]:
    """Plain-data form of a glossary, suitable for YAML/JSON dumping."""
    return {
        "version": glossary.version,
        "patterns": [
            {
                "id": p.id,
                "name": p.name,
                "regexes": list(p.regexes),
                "pattern_type": p.pattern_type.value,
                "must_keywords": list(p.must_keywords),
                "should_keywords": list(p.should_keywords),
                "d_max": p.d_max,
                "alpha": p.alpha,
                "validation_score": p.validation_score,
                "threshold": p.threshold,
            }
            for p in glossary.patterns
        ],
    }


def dumps(glossary: Glossary) -> str:
    """Serialize a glossary back to YAML. ``loads(dumps(g)) == g``."""
    return yaml.safe_dump(to_dict(glossary), sort_keys=False)


def save_glossary(glossary: Glossary, path: str | Path) -> None:
    Path(path).write_text(dumps(glossary), encoding="utf-8")


def glossary_stats(glossary: Glossary) -> dict[str, int]:
    """Exact pattern/regex/keyword counts."""
    return {
        "pattern_count": len(glossary.patterns),
        "regex_count": sum(len(p.regexes) for p in glossary.patterns),
        "keyword_count": sum(len(p.must_keywords) + len(p.should_keywords) for p in glossary.patterns),
    }
