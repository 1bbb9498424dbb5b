"""Exact keyword matching with an Aho-Corasick automaton.

All must/should keywords of every pattern go into one trie; failure links
(BFS, longest proper suffix present in the trie) let a single pass over
the text find every occurrence, overlaps included, without re-reading
input bytes. Matching is byte-level: the pipeline lowercases both the
keywords and the scanned text, so the automaton itself is case-blind.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

MUST = "must"
SHOULD = "should"


class EmptyKeywordError(ValueError):
    pass


@dataclass
class _TrieNode:
    children: dict[int, int] = field(default_factory=dict)  # byte -> node id
    fail: int = 0
    terminal: list[int] = field(default_factory=list)  # keyword ids ending here
    output: list[int] = field(default_factory=list)  # terminal ∪ fail-chain outputs


@dataclass(frozen=True)
class KeywordHit:
    keyword_id: int
    keyword: str  # lowercased form that matched
    start: int
    end: int
    pattern_id: str
    role: str  # MUST | SHOULD


@dataclass
class KeywordAutomaton:
    """Immutable after build; share freely across scans."""

    nodes: list[_TrieNode]
    keyword_table: tuple[tuple[str, str, str], ...]  # id -> (keyword, pattern_id, role)
    # dense arrays for the jit walk
    _goto: np.ndarray | None = None  # int32[n_nodes, 256]
    _out_off: np.ndarray | None = None
    _out_ids: np.ndarray | None = None
    _kw_len: np.ndarray | None = None

    def node_count(self) -> int:
        return len(self.nodes)

    def to_dot(self) -> str:
        """DOT dump of the trie with failure links (dashed)."""
        lines = ["digraph trie {", "  rankdir=LR;", "  node [shape=circle, fontsize=10];"]
        for i, node in enumerate(self.nodes):
            if node.terminal:
                words = ",".join(self.keyword_table[k][0] for k in node.terminal)
                lines.append(f'  {i} [shape=doublecircle, label="{i}\\n{words}"];')
            else:
                lines.append(f'  {i} [label="{i}"];')
        for i, node in enumerate(self.nodes):
            for byte, child in sorted(node.children.items()):
                ch = chr(byte) if 0x20 <= byte < 0x7F else f"\\x{byte:02x}"
                lines.append(f'  {i} -> {child} [label="{ch}"];')
            if i != 0 and node.fail != 0:
                lines.append(f"  {i} -> {node.fail} [style=dashed, color=gray];")
        lines.append("}")
        return "\n".join(lines)


def build_automaton(keywords: list[tuple[str, str, str]]) -> KeywordAutomaton:
    """Build from (keyword, pattern_id, role) triples.

    Keywords are lowercased here; duplicates across patterns keep distinct
    ids so hits can be attributed to their owning pattern. An empty triple
    list yields an automaton that finds nothing.
    """
    nodes = [_TrieNode()]
    table: list[tuple[str, str, str]] = []
    for keyword, pattern_id, role in keywords:
        if not keyword:
            raise EmptyKeywordError(f"pattern {pattern_id!r} has an empty keyword")
        if role not in (MUST, SHOULD):
            raise ValueError(f"keyword role must be '{MUST}' or '{SHOULD}', got {role!r}")
        kw_id = len(table)
        table.append((keyword.lower(), pattern_id, role))
        cur = 0
        for byte in keyword.lower().encode("utf-8"):
            nxt = nodes[cur].children.get(byte)
            if nxt is None:
                nxt = len(nodes)
                nodes.append(_TrieNode())
                nodes[cur].children[byte] = nxt
            cur = nxt
        nodes[cur].terminal.append(kw_id)

    # failure links breadth-first; output set = own terminals + fail target's output
    queue: deque[int] = deque()
    for child in nodes[0].children.values():
        nodes[child].fail = 0
        queue.append(child)
    while queue:
        cur = queue.popleft()
        node = nodes[cur]
        node.output = list(node.terminal)
        fail_node = nodes[node.fail]
        node.output.extend(fail_node.output)
        for byte, child in node.children.items():
            queue.append(child)
            f = node.fail
            while f != 0 and byte not in nodes[f].children:
                f = nodes[f].fail
            target = nodes[f].children.get(byte, 0)
            nodes[child].fail = target if target != child else 0

    automaton = KeywordAutomaton(nodes=nodes, keyword_table=tuple(table))
    _densify(automaton)
    return automaton


def _densify(a: KeywordAutomaton) -> None:
    # goto(n, b) with failure links pre-resolved: a full DFA over bytes
    n = len(a.nodes)
    goto = np.zeros((n, 256), dtype=np.int32)
    for byte, child in a.nodes[0].children.items():
        goto[0, byte] = child
    order: deque[int] = deque(a.nodes[0].children.values())
    while order:
        cur = order.popleft()
        node = a.nodes[cur]
        for byte in range(256):
            child = node.children.get(byte)
            if child is not None:
                goto[cur, byte] = child
                order.append(child)
            else:
                goto[cur, byte] = goto[node.fail, byte]
    out_off = np.zeros(n + 1, dtype=np.int32)
    out_ids: list[int] = []
    for i, node in enumerate(a.nodes):
        out_ids.extend(node.output)
        out_off[i + 1] = len(out_ids)
    a._goto = goto
    a._out_off = out_off
    a._out_ids = np.array(out_ids, dtype=np.int32) if out_ids else np.zeros(0, dtype=np.int32)
    a._kw_len = np.array([len(k.encode("utf-8")) for k, _, _ in a.keyword_table], dtype=np.int32)


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _find_kernel(goto, out_off, out_ids, data):  # pragma: no cover - jit
        n = data.shape[0]
        cap = 256
        hit_kw = np.empty(cap, np.int32)
        hit_end = np.empty(cap, np.int64)
        n_hit = 0
        state = 0
        for i in range(n):
            state = goto[state, data[i]]
            o0 = out_off[state]
            o1 = out_off[state + 1]
            for k in range(o0, o1):
                if n_hit >= cap:
                    cap *= 2
                    tmp = np.empty(cap, np.int32)
                    tmp[:n_hit] = hit_kw[:n_hit]
                    hit_kw = tmp
                    tmp2 = np.empty(cap, np.int64)
                    tmp2[:n_hit] = hit_end[:n_hit]
                    hit_end = tmp2
                hit_kw[n_hit] = out_ids[k]
                hit_end[n_hit] = i + 1
                n_hit += 1
        return hit_kw[:n_hit], hit_end[:n_hit]


def _find_python(a: KeywordAutomaton, data: bytes) -> list[tuple[int, int]]:
    goto = a._goto
    out_off = a._out_off
    out_ids = a._out_ids
    hits = []
    state = 0
    for i, byte in enumerate(data):
        state = int(goto[state, byte])
        for k in range(int(out_off[state]), int(out_off[state + 1])):
            hits.append((int(out_ids[k]), i + 1))
    return hits


def find_keywords(a: KeywordAutomaton, text: bytes | str) -> list[KeywordHit]:
    """Every keyword occurrence in ``text`` (pre-lowercased by the caller),
    overlaps included, sorted by (start, keyword_id)."""
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    if not data:
        return []
    use_jit = _HAVE_NUMBA and os.environ.get("PIISCAN_NO_JIT", "") not in ("1", "true", "yes")
    if use_jit:
        kw_arr, end_arr = _find_kernel(a._goto, a._out_off, a._out_ids, np.frombuffer(data, dtype=np.uint8))
        pairs = zip(kw_arr.tolist(), end_arr.tolist())
    else:
        pairs = iter(_find_python(a, data))
    hits = []
    for kw_id, end in pairs:
        keyword, pattern_id, role = a.keyword_table[kw_id]
        start = end - len(keyword.encode("utf-8"))
        hits.append(
            KeywordHit(keyword_id=kw_id, keyword=keyword, start=start, end=end, pattern_id=pattern_id, role=role)
        )
    hits.sort(key=lambda h: (h.start, h.keyword_id))
    return hits
