"""End-to-end detection workflow.

Stages run in a fixed order on every text unit: regex-set scan, keyword
proximity lookup, type validation, confidence scoring, must-keyword
gating, optional NER rescan and merge, threshold filtering. Compiled
artifacts are immutable and shared; files are scanned by a worker pool
whose detection set equals the single-worker run.
"""

from __future__ import annotations

import bisect
import datetime as dt
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import ingestion
from .glossary import Glossary, PatternSpec, DEFAULT_THRESHOLD
from .ingestion import Diagnostic, FileDescriptor, Locator, TextUnit
from .keywords import KeywordAutomaton, KeywordHit, build_automaton, find_keywords
from .ner import MergePolicy, NerPlugin, rescan, spans_overlap
from .regexset import CompiledPatternSet, compile_set, parse_regex
from .regexset import scan as regex_scan
from .scoring import (
    ConfidenceBreakdown,
    Evidence,
    apply_must_criteria,
    score_detection,
    span_distance,
)
from .validators import validate

STAGE_REGEX = "regex"
STAGE_NER = "ner"
STAGE_MERGED = "merged"

_LOWER = bytes(b + 32 if 65 <= b <= 90 else b for b in range(256))


@dataclass(frozen=True)
class Detection:
    """One retained finding, with the evidence that scored it."""

    pattern_id: str  # glossary id, or the NER entity type
    path: str
    locator: Locator
    start: int  # absolute offset (file bytes for byte units, in-cell otherwise)
    end: int
    text: str
    confidence: float
    stage: str  # regex | ner | merged
    breakdown: ConfidenceBreakdown | None = None
    validator_reason: str = ""

    def to_dict(self, redact: bool) -> dict:
        payload = {
            "pattern_id": self.pattern_id,
            "path": self.path,
            "locator": self.locator.to_dict(),
            "start": self.start,
            "end": self.end,
            "text": f"<{self.pattern_id}:{self.end - self.start}>" if redact else self.text,
            "confidence": self.confidence,
            "stage": self.stage,
            "validator_reason": self.validator_reason,
        }
        if self.breakdown is not None:
            payload["score"] = {
                "proximity": self.breakdown.proximity_score,
                "validation": self.breakdown.validation_score,
                "total": self.breakdown.total,
                "keywords": [
                    {
                        "keyword": c.keyword,
                        "role": c.role,
                        "distance": c.distance,
                        "contribution": c.contribution,
                    }
                    for c in self.breakdown.per_keyword
                ],
            }
        return payload


@dataclass
class StageCounters:
    regex_candidates: int = 0
    ner_entities: int = 0
    dropped_must_gate: int = 0
    dropped_threshold: int = 0
    merged: int = 0

    def add(self, other: "StageCounters") -> None:
        self.regex_candidates += other.regex_candidates
        self.ner_entities += other.ner_entities
        self.dropped_must_gate += other.dropped_must_gate
        self.dropped_threshold += other.dropped_threshold
        self.merged += other.merged

    def to_dict(self) -> dict:
        return {
            "regex_candidates": self.regex_candidates,
            "ner_entities": self.ner_entities,
            "dropped_must_gate": self.dropped_must_gate,
            "dropped_threshold": self.dropped_threshold,
            "merged": self.merged,
        }


@dataclass
class ScanOptions:
    workers: int = 1
    threshold_override: float | None = None
    ner_plugin: NerPlugin | None = None
    merge_policy: MergePolicy = field(default_factory=MergePolicy)
    reference_date: dt.date | None = None
    region_hint: str | None = None
    chunk_size: int = ingestion.CHUNK_SIZE
    state_budget: int | None = None
    lazy: bool = False


@dataclass(frozen=True)
class CompiledGlossary:
    """Glossary plus every artifact compiled from it; share across workers."""

    glossary: Glossary
    pattern_set: CompiledPatternSet
    automaton: KeywordAutomaton
    overlap: int
    max_keyword_len: int

    def spec(self, pattern_id: str) -> PatternSpec:
        return self.glossary.by_id(pattern_id)


def compile_glossary(
    glossary: Glossary, state_budget: int | None = None, lazy: bool = False
) -> CompiledGlossary:
    asts = []
    for spec in glossary.patterns:
        for source in spec.regexes:
            asts.append((spec.id, parse_regex(source)))
    kwargs = {"lazy": lazy}
    if state_budget is not None:
        kwargs["state_budget"] = state_budget
    pattern_set = compile_set(asts, **kwargs)
    keywords = []
    for spec in glossary.patterns:
        for kw, role in spec.keywords():
            keywords.append((kw, spec.id, role))
    automaton = build_automaton(keywords)
    max_kw = max((len(k.encode("utf-8")) for k, _, _ in keywords), default=0)
    return CompiledGlossary(
        glossary=glossary,
        pattern_set=pattern_set,
        automaton=automaton,
        overlap=ingestion.compute_overlap(glossary),
        max_keyword_len=max_kw,
    )


def _window_hits(
    hits_by_pattern: dict[str, list[KeywordHit]],
    spec: PatternSpec,
    start: int,
    end: int,
    max_kw_len: int,
) -> tuple[tuple[KeywordHit, int], ...]:
    hits = hits_by_pattern.get(spec.id)
    if not hits:
        return ()
    # hits are sorted by start; only those inside [start - d_max - kwlen, end + d_max] matter
    lo = bisect.bisect_left(hits, start - spec.d_max - max_kw_len, key=lambda h: h.start)
    out = []
    for hit in hits[lo:]:
        if hit.start > end + spec.d_max:
            break
        d = span_distance((hit.start, hit.end), (start, end))
        if d <= spec.d_max:
            out.append((hit, d))
    return tuple(out)


def scan_unit(
    unit: TextUnit,
    compiled: CompiledGlossary,
    options: ScanOptions | None = None,
) -> tuple[list[Detection], StageCounters, list[str]]:
    """Run every stage on one unit.

    Returns (detections sorted by (start, pattern_id), stage counters,
    plugin diagnostics). Offsets in detections are absolute per the unit
    locator.
    """
    if options is None:
        options = ScanOptions()
    counters = StageCounters()
    content_bytes = unit.content.encode("utf-8")
    raw_matches = regex_scan(compiled.pattern_set, content_bytes)
    counters.regex_candidates = len(raw_matches)

    hits_by_pattern: dict[str, list[KeywordHit]] = {}
    if raw_matches:
        folded = content_bytes.translate(_LOWER)
        for hit in find_keywords(compiled.automaton, folded):
            hits_by_pattern.setdefault(hit.pattern_id, []).append(hit)

    candidates: list[Detection] = []
    for match in raw_matches:
        spec = compiled.spec(match.pattern_id)
        window = _window_hits(hits_by_pattern, spec, match.start, match.end, compiled.max_keyword_len)
        verdict = validate(
            spec.pattern_type, match.text, clock=options.reference_date, region_hint=options.region_hint
        )
        evidence = Evidence(raw_match=match, keyword_hits=window, verdict=verdict)
        if not apply_must_criteria(evidence, spec):
            counters.dropped_must_gate += 1
            continue
        breakdown = score_detection(evidence, spec)
        candidates.append(
            Detection(
                pattern_id=spec.id,
                path=str(unit.source),
                locator=unit.locator,
                start=unit.locator.absolute(match.start),
                end=unit.locator.absolute(match.end),
                text=match.text,
                confidence=breakdown.total,
                stage=STAGE_REGEX,
                breakdown=breakdown,
                validator_reason=verdict.reason,
            )
        )

    diagnostics: list[str] = []
    if options.ner_plugin is not None:
        entities, diagnostics = rescan(content_bytes, options.ner_plugin)
        counters.ner_entities = len(entities)
        candidates = merge_detections(candidates, entities, options.merge_policy, compiled.glossary, unit)
        counters.merged = sum(1 for d in candidates if d.stage == STAGE_MERGED)

    retained: list[Detection] = []
    for det in candidates:
        threshold = _threshold_for(det, compiled.glossary, options)
        if det.confidence >= threshold:
            retained.append(det)
        else:
            counters.dropped_threshold += 1
    retained.sort(key=lambda d: (d.start, d.pattern_id, d.end))
    return retained, counters, diagnostics


def _threshold_for(det: Detection, glossary: Glossary, options: ScanOptions) -> float:
    if options.threshold_override is not None:
        return options.threshold_override
    try:
        return glossary.by_id(det.pattern_id).threshold
    except KeyError:
        # NER entity type with no glossary pattern: match the glossary default
        for spec in glossary.patterns:
            if det.pattern_id == spec.pattern_type.value:
                return spec.threshold
        return DEFAULT_THRESHOLD


def merge_detections(
    regex_detections: list[Detection],
    ner_entities: list,
    policy: MergePolicy,
    glossary: Glossary | None,
    unit: TextUnit,
) -> list[Detection]:
    """Fold NER entities into the regex detection list.

    Same-type overlapping spans merge (union span, higher confidence);
    everything else is kept side by side, so merging can only add recall.
    """
    merged = list(regex_detections)
    content_bytes = unit.content.encode("utf-8")
    base = unit.locator.absolute(0)
    for entity in ner_entities:
        mapped = policy.mapped_confidence(entity, glossary)
        abs_start = unit.locator.absolute(entity.start)
        abs_end = unit.locator.absolute(entity.end)
        target_idx = None
        if policy.same_type_overlap_merges:
            for i, det in enumerate(merged):
                if det.stage == STAGE_NER:
                    same_type = det.pattern_id == entity.entity_type
                else:
                    spec_type = _pattern_type_of(glossary, det.pattern_id)
                    same_type = entity.entity_type in (det.pattern_id, spec_type)
                if same_type and spans_overlap(det.start, det.end, abs_start, abs_end):
                    target_idx = i
                    break
        if target_idx is not None:
            det = merged[target_idx]
            new_start = min(det.start, abs_start)
            new_end = max(det.end, abs_end)
            text = det.text
            if (new_start, new_end) != (det.start, det.end):
                text = content_bytes[new_start - base : new_end - base].decode("utf-8", errors="replace")
            merged[target_idx] = Detection(
                pattern_id=det.pattern_id,
                path=det.path,
                locator=det.locator,
                start=new_start,
                end=new_end,
                text=text,
                confidence=max(det.confidence, mapped),
                stage=STAGE_MERGED,
                breakdown=det.breakdown,
                validator_reason=det.validator_reason,
            )
        else:
            merged.append(
                Detection(
                    pattern_id=entity.entity_type,
                    path=str(unit.source),
                    locator=unit.locator,
                    start=abs_start,
                    end=abs_end,
                    text=content_bytes[entity.start : entity.end].decode("utf-8", errors="replace"),
                    confidence=mapped,
                    stage=STAGE_NER,
                    breakdown=None,
                    validator_reason="",
                )
            )
    return merged


def _pattern_type_of(glossary: Glossary | None, pattern_id: str) -> str:
    if glossary is None:
        return ""
    try:
        return glossary.by_id(pattern_id).pattern_type.value
    except KeyError:
        return ""


@dataclass
class FileResult:
    path: str
    bytes_scanned: int
    elapsed_ms: float
    detections: list[Detection]
    counters: StageCounters
    diagnostics: list[Diagnostic]


@dataclass
class CorpusResult:
    files: list[FileResult]
    diagnostics: list[Diagnostic]
    counters: StageCounters
    elapsed_ms: float
    workers: int
    glossary_version: str


def _scan_file(descriptor: FileDescriptor, compiled: CompiledGlossary, options: ScanOptions) -> FileResult:
    t0 = time.monotonic()
    diagnostics: list[Diagnostic] = []
    counters = StageCounters()
    detections: list[Detection] = []
    seen: set[tuple[str, str, int, int]] = set()  # chunk-overlap dedup, earlier chunk wins
    size = 0
    try:
        size = descriptor.path.stat().st_size
    except OSError:
        pass
    for unit in ingestion.extract(
        descriptor, diagnostics, chunk_size=options.chunk_size, overlap=compiled.overlap
    ):
        unit_dets, unit_counters, plugin_diags = scan_unit(unit, compiled, options)
        counters.add(unit_counters)
        for message in plugin_diags:
            diagnostics.append(Diagnostic(str(descriptor.path), "ner", message))
        for det in unit_dets:
            key = (det.pattern_id, det.stage, det.start, det.end)
            if key in seen:
                continue
            seen.add(key)
            detections.append(det)
    elapsed_ms = (time.monotonic() - t0) * 1000.0
    return FileResult(
        path=str(descriptor.path),
        bytes_scanned=size,
        elapsed_ms=elapsed_ms,
        detections=detections,
        counters=counters,
        diagnostics=diagnostics,
    )


def scan_corpus(
    paths: list[str | Path],
    compiled: CompiledGlossary,
    options: ScanOptions | None = None,
) -> CorpusResult:
    """Scan every file under ``paths``. File-level parallelism only; the
    detection set is identical for any worker count."""
    if options is None:
        options = ScanOptions()
    t0 = time.monotonic()
    walk_diags: list[Diagnostic] = []
    descriptors = ingestion.walk(paths, walk_diags)
    results: list[FileResult] = []
    if descriptors:
        if options.workers <= 1:
            results = [_scan_file(d, compiled, options) for d in descriptors]
        else:
            with ThreadPoolExecutor(max_workers=options.workers) as pool:
                results = list(pool.map(lambda d: _scan_file(d, compiled, options), descriptors))
    total = StageCounters()
    for r in results:
        total.add(r.counters)
    return CorpusResult(
        files=results,
        diagnostics=walk_diags,
        counters=total,
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
        workers=options.workers,
        glossary_version=compiled.glossary.version,
    )
