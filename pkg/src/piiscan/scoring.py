"""Confidence scoring: keyword proximity plus validation, then a threshold.

The score of a detection is ``max(0, alpha * (d_max - d))`` for the best
in-window keyword, plus the pattern's validation score when its validator
passed. Distance ``d`` counts the characters strictly between the keyword
span and the match span (overlapping or adjacent spans score d = 0).
Detections below the pattern threshold are discarded; must-keywords gate
a detection outright regardless of its numeric score.
"""

from __future__ import annotations

from dataclasses import dataclass

from .glossary import PatternSpec
from .keywords import KeywordHit, MUST
from .regexset import RawMatch
from .validators import ValidationVerdict


def distance(k: KeywordHit, m: RawMatch) -> int:
    """Characters strictly between the two spans; 0 when they touch or overlap."""
    return span_distance((k.start, k.end), (m.start, m.end))


def span_distance(a: tuple[int, int], b: tuple[int, int]) -> int:
    if a[1] <= b[0]:
        return b[0] - a[1]
    if b[1] <= a[0]:
        return a[0] - b[1]
    return 0


def proximity_score(d: int, alpha: float, d_max: int) -> float:
    return max(0.0, alpha * (d_max - d))


@dataclass(frozen=True)
class KeywordContribution:
    keyword_id: int
    keyword: str
    role: str
    distance: int
    contribution: float


@dataclass(frozen=True)
class Evidence:
    """Everything the pipeline gathered about one raw match."""

    raw_match: RawMatch
    keyword_hits: tuple[tuple[KeywordHit, int], ...]  # (hit, d), d <= d_max only
    verdict: ValidationVerdict


@dataclass(frozen=True)
class ConfidenceBreakdown:
    proximity_score: float
    validation_score: float
    total: float
    per_keyword: tuple[KeywordContribution, ...] = ()


def score_detection(evidence: Evidence, spec: PatternSpec) -> ConfidenceBreakdown:
    """Proximity term = best single in-window keyword (nearest occurrence);
    validation term = the pattern's score iff its validator passed."""
    contributions = []
    for hit, d in evidence.keyword_hits:
        contributions.append(
            KeywordContribution(
                keyword_id=hit.keyword_id,
                keyword=hit.keyword,
                role=hit.role,
                distance=d,
                contribution=proximity_score(d, spec.alpha, spec.d_max),
            )
        )
    proximity = max((c.contribution for c in contributions), default=0.0)
    validation = spec.validation_score if evidence.verdict.passed else 0.0
    return ConfidenceBreakdown(
        proximity_score=proximity,
        validation_score=validation,
        total=proximity + validation,
        per_keyword=tuple(contributions),
    )


def apply_must_criteria(evidence: Evidence, spec: PatternSpec) -> bool:
    """True iff every must-keyword has at least one in-window hit.
    Patterns without must-keywords pass vacuously."""
    required = {k.lower() for k in spec.must_keywords}
    if not required:
        return True
    seen = {hit.keyword for hit, _d in evidence.keyword_hits if hit.role == MUST}
    return required <= seen


def filter_by_threshold(scored: list[tuple[object, float]], threshold: float) -> tuple[list[object], int]:
    """Retain items with score >= threshold, order-preserving.

    Returns (retained, dropped_count); callers count the discards for
    recall diagnostics but never see them again.
    """
    retained = [item for item, score in scored if score >= threshold]
    return retained, len(scored) - len(retained)
