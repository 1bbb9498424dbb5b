"""Pluggable NER rescan stage.

The scanner itself ships no ML model. This module defines the plugin
surface (in-process objects or a subprocess speaking a line protocol),
a deterministic dictionary + capitalized-bigram mock used by tests and
the accuracy harness, and the merge step that folds NER entities into
the regex detection stream. Plugin failures degrade to a regex-only
scan with a diagnostic; they never abort.

Subprocess wire protocol (UTF-8, line-oriented):
  request:  decimal byte length of the payload, '\\n', payload
  response: one entity per line: ``type<TAB>start<TAB>end<TAB>confidence``
            terminated by a single blank line
"""

from __future__ import annotations

import re
import subprocess
import threading
from dataclasses import dataclass, field

from .glossary import Glossary, DEFAULT_ALPHA, DEFAULT_D_MAX, DEFAULT_VALIDATION_SCORE


@dataclass(frozen=True)
class NerEntity:
    entity_type: str
    start: int
    end: int
    confidence: float  # [0, 1]
    source: str

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


@dataclass(frozen=True)
class NerPluginDescriptor:
    id: str
    version: str
    entity_types: tuple[str, ...]
    mode: str  # "in_process" | "subprocess"


class PluginUnavailableError(RuntimeError):
    pass


class NerPlugin:
    """Interface: implementations analyze UTF-8 text and return entities
    with byte spans into that text."""

    descriptor: NerPluginDescriptor

    def analyze(self, text: bytes) -> list[NerEntity]:
        raise NotImplementedError


_BIGRAM = re.compile(rb"\b[A-Z][a-z]{1,20} [A-Z][a-z]{1,20}\b")


class MockNerPlugin(NerPlugin):
    """Deterministic stand-in for an ML model.

    Dictionary matching (case-insensitive, word-boundary checked) per
    entity type, plus an optional capitalized-bigram rule that tags
    Title Case word pairs as person names. Pure function of
    (text, dictionaries) by construction.
    """

    def __init__(
        self,
        dictionaries: dict[str, list[str]],
        dictionary_confidence: float = 0.9,
        bigram_person_names: bool = True,
        bigram_confidence: float = 0.6,
        plugin_id: str = "mock-dictionary",
    ):
        self.dictionaries = {t: sorted(set(p.lower() for p in phrases)) for t, phrases in dictionaries.items()}
        self.dictionary_confidence = dictionary_confidence
        self.bigram_person_names = bigram_person_names
        self.bigram_confidence = bigram_confidence
        types = tuple(sorted(self.dictionaries))
        if bigram_person_names:
            types = tuple(sorted(set(types) | {"person_name"}))
        self.descriptor = NerPluginDescriptor(id=plugin_id, version="1", entity_types=types, mode="in_process")

    def analyze(self, text: bytes) -> list[NerEntity]:
        lowered = text.lower()
        entities = []
        for entity_type, phrases in self.dictionaries.items():
            for phrase in phrases:
                needle = phrase.encode("utf-8")
                pos = lowered.find(needle)
                while pos != -1:
                    end = pos + len(needle)
                    if _boundary_ok(lowered, pos, end):
                        entities.append(
                            NerEntity(
                                entity_type=entity_type,
                                start=pos,
                                end=end,
                                confidence=self.dictionary_confidence,
                                source=self.descriptor.id,
                            )
                        )
                    pos = lowered.find(needle, pos + 1)
        if self.bigram_person_names:
            dict_spans = [(e.start, e.end) for e in entities]
            for m in _BIGRAM.finditer(text):
                if any(s < m.end() and m.start() < e for s, e in dict_spans):
                    continue  # dictionary hits win over the heuristic
                entities.append(
                    NerEntity(
                        entity_type="person_name",
                        start=m.start(),
                        end=m.end(),
                        confidence=self.bigram_confidence,
                        source=self.descriptor.id,
                    )
                )
        entities.sort(key=lambda e: (e.start, e.entity_type))
        return entities


def _boundary_ok(data: bytes, start: int, end: int) -> bool:
    # reject hits glued inside alphanumeric runs ("987654321" inside a longer number)
    def word(b: int) -> bool:
        return (48 <= b <= 57) or (65 <= b <= 90) or (97 <= b <= 122) or b == 95

    if start > 0 and word(data[start - 1]) and word(data[start]):
        return False
    if end < len(data) and word(data[end - 1]) and word(data[end]):
        return False
    return True


class SubprocessNerPlugin(NerPlugin):
    """Bridges to an external model over the stdio line protocol.

    A single child process serves requests serially; an internal lock
    keeps concurrent scan workers from interleaving frames.
    """

    def __init__(self, command: list[str], plugin_id: str | None = None, timeout: float = 30.0):
        self.command = list(command)
        self.timeout = timeout
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None
        self.descriptor = NerPluginDescriptor(
            id=plugin_id or f"subprocess:{command[0]}",
            version="1",
            entity_types=(),
            mode="subprocess",
        )

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                )
            except OSError as exc:
                raise PluginUnavailableError(f"cannot start NER plugin {self.command!r}: {exc}") from exc
        return self._proc

    def analyze(self, text: bytes) -> list[NerEntity]:
        with self._lock:
            proc = self._ensure_proc()
            try:
                proc.stdin.write(b"%d\n" % len(text))
                proc.stdin.write(text)
                proc.stdin.flush()
                entities = []
                while True:
                    line = proc.stdout.readline()
                    if not line:
                        raise PluginUnavailableError("NER plugin closed its output stream")
                    line = line.rstrip(b"\n")
                    if not line:
                        break
                    parts = line.split(b"\t")
                    if len(parts) != 4:
                        raise PluginUnavailableError(f"malformed entity line from plugin: {line!r}")
                    entity_type = parts[0].decode("utf-8", errors="replace")
                    start, end = int(parts[1]), int(parts[2])
                    confidence = min(1.0, max(0.0, float(parts[3])))
                    if 0 <= start < end <= len(text):
                        entities.append(
                            NerEntity(
                                entity_type=entity_type,
                                start=start,
                                end=end,
                                confidence=confidence,
                                source=self.descriptor.id,
                            )
                        )
                return entities
            except (BrokenPipeError, ValueError, OSError) as exc:
                self._close()
                raise PluginUnavailableError(f"NER plugin failed: {exc}") from exc

    def _close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
            except OSError:
                pass
            self._proc = None

    def close(self) -> None:
        with self._lock:
            self._close()


def rescan(text: bytes, plugin: NerPlugin | None) -> tuple[list[NerEntity], list[str]]:
    """Run the secondary scan; failures yield ([], [diagnostic]) so the
    pipeline continues regex-only."""
    if plugin is None:
        return [], []
    try:
        return plugin.analyze(text), []
    except PluginUnavailableError as exc:
        return [], [f"ner_plugin_unavailable: {exc}"]
    except Exception as exc:  # a misbehaving plugin must never kill the scan
        return [], [f"ner_plugin_error: {type(exc).__name__}: {exc}"]


@dataclass(frozen=True)
class MergePolicy:
    """How NER entities enter the additive confidence ledger.

    An entity's [0, 1] confidence maps affinely onto the regex score
    range: ``round(gain * confidence)``. When the entity type names a
    glossary pattern the gain is that pattern's maximum score
    (alpha * d_max + validation_score); otherwise ``default_gain``
    (the glossary-default maximum, 2 * 50 + 30 = 130).
    """

    default_gain: float = DEFAULT_ALPHA * DEFAULT_D_MAX + DEFAULT_VALIDATION_SCORE
    same_type_overlap_merges: bool = True

    def mapped_confidence(self, entity: NerEntity, glossary: Glossary | None) -> float:
        gain = self.default_gain
        if glossary is not None:
            for spec in glossary.patterns:
                if entity.entity_type in (spec.id, spec.pattern_type.value):
                    gain = spec.max_score()
                    break
        return float(round(gain * entity.confidence))


def spans_overlap(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    return a_start < b_end and b_start < a_end
