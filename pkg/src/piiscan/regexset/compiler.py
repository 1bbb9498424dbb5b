"""Set compilation: many regexes -> one DFA with tagged accept states.

Each regex becomes a Thompson NFA fragment; fragments are unioned under a
single root with a distinct accept tag per (pattern, regex) member. Subset
construction then determinizes over a byte-class alphabet. Anchors and the
word boundary are epsilon transitions guarded by context, so every DFA
state also records the word-ness of the previous byte (state doubling)
and match reporting is delayed by one input symbol: a state's accept set
names the members whose match ended just before the symbol that entered
the state. A virtual end-of-input symbol resolves trailing assertions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import parser
from .parser import (
    Alt,
    Assert,
    Cat,
    Empty,
    Group,
    Klass,
    Lit,
    Node,
    Repeat,
    TEXT_END,
    TEXT_START,
    WORD_BOUNDARY,
    WORD_MASK,
)

DEFAULT_STATE_BUDGET = 1_000_000

# previous-byte context
CTX_BEGIN = 0  # position 0: non-word on the left, ^ holds
CTX_NONWORD = 1
CTX_WORD = 2

# next-symbol context used when resolving assertions
NEXT_NONWORD = 0
NEXT_WORD = 1
NEXT_EOI = 2


class StateBudgetError(RuntimeError):
    """Eager determinization would exceed the configured state budget."""

    def __init__(self, budget: int):
        super().__init__(
            f"DFA state budget of {budget} exceeded; the glossary is pathological "
            f"for eager compilation (retry with lazy=True or raise the budget)"
        )
        self.budget = budget


class _Nfa:
    """Flat NFA: byte edges carry 256-bit masks, assertions guard epsilons."""

    def __init__(self) -> None:
        self.byte_edges: list[list[tuple[int, int]]] = []  # state -> [(mask, target)]
        self.eps: list[list[int]] = []  # state -> [target]
        self.asserts: list[list[tuple[str, int]]] = []  # state -> [(kind, target)]
        self.accept_tag: dict[int, int] = {}  # accept state -> member id

    def new_state(self) -> int:
        self.byte_edges.append([])
        self.eps.append([])
        self.asserts.append([])
        return len(self.byte_edges) - 1

    def add_fragment(self, node: Node) -> tuple[int, int]:
        """Build ``node``, returning (entry, exit) states."""
        if isinstance(node, Empty):
            s = self.new_state()
            return s, s
        if isinstance(node, Lit):
            s, t = self.new_state(), self.new_state()
            self.byte_edges[s].append((1 << node.byte, t))
            return s, t
        if isinstance(node, Klass):
            s, t = self.new_state(), self.new_state()
            self.byte_edges[s].append((node.mask, t))
            return s, t
        if isinstance(node, Assert):
            s, t = self.new_state(), self.new_state()
            self.asserts[s].append((node.kind, t))
            return s, t
        if isinstance(node, Group):
            return self.add_fragment(node.node)
        if isinstance(node, Cat):
            entry, out = self.add_fragment(node.parts[0])
            for part in node.parts[1:]:
                s, t = self.add_fragment(part)
                self.eps[out].append(s)
                out = t
            return entry, out
        if isinstance(node, Alt):
            entry, out = self.new_state(), self.new_state()
            for branch in node.branches:
                s, t = self.add_fragment(branch)
                self.eps[entry].append(s)
                self.eps[t].append(out)
            return entry, out
        if isinstance(node, Repeat):
            return self._add_repeat(node)
        raise TypeError(f"unknown AST node {node!r}")

    def _add_repeat(self, node: Repeat) -> tuple[int, int]:
        entry = self.new_state()
        out = entry
        for _ in range(node.lo):
            s, t = self.add_fragment(node.node)
            self.eps[out].append(s)
            out = t
        if node.hi is None:
            # trailing X*: loop a fresh copy
            s, t = self.add_fragment(node.node)
            loop_out = self.new_state()
            self.eps[out].append(loop_out)
            self.eps[loop_out].append(s)
            self.eps[t].append(loop_out)
            return entry, loop_out
        for _ in range(node.hi - node.lo):
            # optional copies: each may be skipped
            s, t = self.add_fragment(node.node)
            skip = self.new_state()
            self.eps[out].append(s)
            self.eps[out].append(skip)
            self.eps[t].append(skip)
            out = skip
        return entry, out


def _build_union_nfa(members: list[Node]) -> tuple[_Nfa, int]:
    nfa = _Nfa()
    root = nfa.new_state()
    for member_id, ast in enumerate(members):
        entry, out = nfa.add_fragment(ast)
        nfa.eps[root].append(entry)
        nfa.accept_tag[out] = member_id
    return nfa, root


def _byte_classes(nfa: _Nfa) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Partition bytes into equivalence classes.

    Bytes behave identically iff they agree on every edge mask and on
    word-ness (word-ness always splits so ``\\b`` context stays exact).
    Returns (class_of[256], representative byte per class, class_is_word).
    """
    masks = sorted({mask for edges in nfa.byte_edges for mask, _ in edges})
    signatures: dict[tuple, int] = {}
    class_of = np.zeros(256, dtype=np.int32)
    reps: list[int] = []
    is_word: list[bool] = []
    for b in range(256):
        sig = tuple((m >> b) & 1 for m in masks) + (((WORD_MASK >> b) & 1),)
        cls = signatures.get(sig)
        if cls is None:
            cls = len(signatures)
            signatures[sig] = cls
            reps.append(b)
            is_word.append(bool((WORD_MASK >> b) & 1))
        class_of[b] = cls
    return class_of, reps, np.array(is_word, dtype=np.bool_)


@dataclass(frozen=True)
class _StateKey:
    kernel: frozenset[int]
    ctx: int
    accepts: tuple[int, ...]


class _Determinizer:
    """Shared machinery for eager and lazy subset construction."""

    def __init__(self, nfa: _Nfa, root: int, class_of: np.ndarray, reps: list[int], class_word: np.ndarray):
        self.nfa = nfa
        self.root = root
        self.class_of = class_of
        self.reps = reps
        self.class_word = class_word
        self.n_classes = len(reps)  # + 1 virtual EOI symbol
        self.eoi = self.n_classes
        self.states: dict[_StateKey, int] = {}
        self.keys: list[_StateKey] = []
        self._closure_cache: dict[tuple[frozenset[int], int, int], frozenset[int]] = {}
        # canonical states
        self.dead = self._intern(_StateKey(frozenset(), CTX_NONWORD, ()))
        start_kernel = frozenset((root,))
        self.q0_begin = self._intern(_StateKey(start_kernel, CTX_BEGIN, ()))
        self.q0_nonword = self._intern(_StateKey(start_kernel, CTX_NONWORD, ()))
        self.q0_word = self._intern(_StateKey(start_kernel, CTX_WORD, ()))

    def _intern(self, key: _StateKey) -> int:
        sid = self.states.get(key)
        if sid is None:
            sid = len(self.keys)
            self.states[key] = sid
            self.keys.append(key)
        return sid

    def n_states(self) -> int:
        return len(self.keys)

    def _closure(self, kernel: frozenset[int], ctx: int, nxt: int) -> frozenset[int]:
        cached = self._closure_cache.get((kernel, ctx, nxt))
        if cached is not None:
            return cached
        prev_word = ctx == CTX_WORD
        next_word = nxt == NEXT_WORD
        at_start = ctx == CTX_BEGIN
        at_end = nxt == NEXT_EOI
        seen = set(kernel)
        stack = list(kernel)
        nfa = self.nfa
        while stack:
            q = stack.pop()
            for t in nfa.eps[q]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
            for kind, t in nfa.asserts[q]:
                if t in seen:
                    continue
                if kind == WORD_BOUNDARY:
                    ok = prev_word != next_word
                elif kind == TEXT_START:
                    ok = at_start
                else:  # TEXT_END
                    ok = at_end
                if ok:
                    seen.add(t)
                    stack.append(t)
        result = frozenset(seen)
        self._closure_cache[(kernel, ctx, nxt)] = result
        return result

    def transition_key(self, sid: int, cls: int) -> _StateKey:
        key = self.keys[sid]
        if not key.kernel:
            return self.keys[self.dead]
        if cls == self.eoi:
            closure = self._closure(key.kernel, key.ctx, NEXT_EOI)
            accepts = self._accepts(closure)
            return _StateKey(frozenset(), CTX_NONWORD, accepts)
        word = bool(self.class_word[cls])
        closure = self._closure(key.kernel, key.ctx, NEXT_WORD if word else NEXT_NONWORD)
        accepts = self._accepts(closure)
        rep = self.reps[cls]
        moved = set()
        for q in closure:
            for mask, t in self.nfa.byte_edges[q]:
                if (mask >> rep) & 1:
                    moved.add(t)
        return _StateKey(frozenset(moved), CTX_WORD if word else CTX_NONWORD, accepts)

    def _accepts(self, closure: frozenset[int]) -> tuple[int, ...]:
        tags = self.nfa.accept_tag
        found = {tags[q] for q in closure if q in tags}
        return tuple(sorted(found))


@dataclass
class SetStats:
    state_count: int
    memory_bytes_estimate: int
    byte_class_count: int
    lazy: bool


@dataclass
class CompiledPatternSet:
    """Immutable compiled form of a glossary's regexes.

    ``member_table[member_id] == (pattern_id, regex_index)``. Eager sets
    carry dense transition/accept tables (consumed by the scanners); lazy
    sets compute transitions on demand under the same semantics.
    """

    member_table: tuple[tuple[str, int], ...]
    class_of: np.ndarray  # byte -> class, int32[256]
    class_word: np.ndarray  # class -> is word byte
    n_classes: int  # excludes the virtual EOI symbol
    q0_begin: int
    q0_nonword: int
    q0_word: int
    dead: int
    # eager tables (None when lazy)
    table: np.ndarray | None = None  # int32[n_states, n_classes + 1]
    accept_offsets: np.ndarray | None = None  # int32[n_states + 1]
    accept_members: np.ndarray | None = None  # int32[total accepts]
    alive: np.ndarray | None = None  # uint8[n_states], kernel non-empty
    word_context: np.ndarray | None = None  # uint8[n_states], previous-byte ctx
    can_match_empty: tuple[bool, ...] = ()
    stats: SetStats = field(default_factory=lambda: SetStats(0, 0, 0, False))
    _lazy: "_LazyDfa | None" = None

    @property
    def lazy(self) -> bool:
        return self._lazy is not None

    def pattern_ids(self) -> list[str]:
        seen: list[str] = []
        for pid, _ in self.member_table:
            if pid not in seen:
                seen.append(pid)
        return seen

    def to_dot(self) -> str:
        """DOT dump of the automaton (eager sets only) for visual inspection."""
        if self.table is None:
            raise ValueError("automaton dump requires an eager set")
        lines = ["digraph dfa {", "  rankdir=LR;", '  node [shape=circle, fontsize=10];']
        n_states = self.table.shape[0]
        for s in range(n_states):
            accepts = self.accept_members[self.accept_offsets[s] : self.accept_offsets[s + 1]]
            label = str(s)
            if len(accepts):
                ids = ",".join(self.member_table[m][0] for m in accepts)
                lines.append(f'  {s} [shape=doublecircle, label="{label}\\n{ids}"];')
            else:
                lines.append(f'  {s} [label="{label}"];')
        # merge edges sharing (src, dst)
        for s in range(n_states):
            if not self.alive[s]:
                continue
            dests: dict[int, list[str]] = {}
            for c in range(self.n_classes + 1):
                t = int(self.table[s, c])
                if t == self.dead:
                    continue
                dests.setdefault(t, []).append(_class_label(self.class_of, c, self.n_classes))
            for t, labels in dests.items():
                text = ",".join(labels[:6]) + (",…" if len(labels) > 6 else "")
                lines.append(f'  {s} -> {t} [label="{text}"];')
        for q0, name in ((self.q0_begin, "begin"), (self.q0_nonword, "nonword"), (self.q0_word, "word")):
            lines.append(f'  start_{name} [shape=point]; start_{name} -> {q0};')
        lines.append("}")
        return "\n".join(lines)


def _class_label(class_of: np.ndarray, cls: int, n_classes: int) -> str:
    if cls == n_classes:
        return "EOI"
    bytes_in = [b for b in range(256) if class_of[b] == cls]
    shown = "".join(chr(b) if 0x20 <= b < 0x7F else f"\\x{b:02x}" for b in bytes_in[:4])
    return shown + ("…" if len(bytes_in) > 4 else "")


class _LazyDfa:
    """On-demand determinization with a bounded, clearable state cache."""

    def __init__(self, det: _Determinizer, budget: int):
        self.det = det
        self.budget = budget
        self.trans: dict[tuple[int, int], int] = {}
        self.resets = 0

    def transition(self, sid: int, cls: int) -> int:
        t = self.trans.get((sid, cls))
        if t is None:
            key = self.det.transition_key(sid, cls)
            t = self.det._intern(key)
            self.trans[(sid, cls)] = t
            if self.det.n_states() > self.budget:
                self._reset()
        return t

    def _reset(self) -> None:
        # Keep the canonical states, drop everything else (RE2-style cache flush).
        det = self.det
        keep = [det.keys[i] for i in (det.dead, det.q0_begin, det.q0_nonword, det.q0_word)]
        det.states = {}
        det.keys = []
        det._closure_cache.clear()
        for key in keep:
            det._intern(key)
        self.trans = {}
        self.resets += 1

    def accepts(self, sid: int) -> tuple[int, ...]:
        return self.det.keys[sid].accepts

    def alive(self, sid: int) -> bool:
        return bool(self.det.keys[sid].kernel)


def compile_set(
    asts: list[tuple[str, Node]],
    state_budget: int = DEFAULT_STATE_BUDGET,
    lazy: bool = False,
    on_budget: str = "lazy",
) -> CompiledPatternSet:
    """Compile (pattern_id, AST) members into one pattern set.

    Eager by default. ``on_budget`` selects what happens when eager
    construction would exceed ``state_budget``: fall back to a lazy DFA
    ("lazy") or raise :class:`StateBudgetError` ("error").
    """
    if not asts:
        raise ValueError("compile_set requires at least one pattern")
    if on_budget not in ("lazy", "error"):
        raise ValueError(f"on_budget must be 'lazy' or 'error', got {on_budget!r}")

    members = [ast for _, ast in asts]
    nfa, root = _build_union_nfa(members)
    class_of, reps, class_word = _byte_classes(nfa)
    det = _Determinizer(nfa, root, class_of, reps, class_word)

    regex_index: dict[str, int] = {}
    member_table = []
    for pid, _ in asts:
        idx = regex_index.get(pid, 0)
        member_table.append((pid, idx))
        regex_index[pid] = idx + 1
    empties = tuple(parser.can_match_empty(ast) for _, ast in asts)

    base = CompiledPatternSet(
        member_table=tuple(member_table),
        class_of=class_of,
        class_word=class_word,
        n_classes=det.n_classes,
        q0_begin=det.q0_begin,
        q0_nonword=det.q0_nonword,
        q0_word=det.q0_word,
        dead=det.dead,
        can_match_empty=empties,
    )

    if not lazy:
        try:
            _eager_fill(base, det, state_budget)
            return base
        except StateBudgetError:
            if on_budget == "error":
                raise
            # fall through to lazy below with a fresh determinizer
            nfa, root = _build_union_nfa(members)
            class_of, reps, class_word = _byte_classes(nfa)
            det = _Determinizer(nfa, root, class_of, reps, class_word)

    base._lazy = _LazyDfa(det, state_budget)
    base.stats = SetStats(
        state_count=det.n_states(),
        memory_bytes_estimate=_lazy_memory_estimate(det),
        byte_class_count=det.n_classes,
        lazy=True,
    )
    return base


def _eager_fill(cset: CompiledPatternSet, det: _Determinizer, budget: int) -> None:
    n_symbols = det.n_classes + 1
    rows: list[list[int]] = []
    frontier = [det.dead, det.q0_begin, det.q0_nonword, det.q0_word]
    built = 0
    while built < det.n_states():
        sid = built
        built += 1
        row = []
        for cls in range(n_symbols):
            key = det.transition_key(sid, cls)
            t = det._intern(key)
            if det.n_states() > budget:
                raise StateBudgetError(budget)
            row.append(t)
        rows.append(row)
    del frontier

    n_states = det.n_states()
    table = np.array(rows, dtype=np.int32)
    accept_offsets = np.zeros(n_states + 1, dtype=np.int32)
    accept_all: list[int] = []
    alive = np.zeros(n_states, dtype=np.uint8)
    word_context = np.zeros(n_states, dtype=np.uint8)
    for sid in range(n_states):
        key = det.keys[sid]
        accept_all.extend(key.accepts)
        accept_offsets[sid + 1] = len(accept_all)
        alive[sid] = 1 if key.kernel else 0
        word_context[sid] = key.ctx

    cset.table = table
    cset.accept_offsets = accept_offsets
    cset.accept_members = np.array(accept_all, dtype=np.int32) if accept_all else np.zeros(0, dtype=np.int32)
    cset.alive = alive
    cset.word_context = word_context
    memory = (
        table.nbytes
        + accept_offsets.nbytes
        + cset.accept_members.nbytes
        + alive.nbytes
        + word_context.nbytes
        + cset.class_of.nbytes
        + cset.class_word.nbytes
    )
    cset.stats = SetStats(
        state_count=n_states,
        memory_bytes_estimate=int(memory),
        byte_class_count=det.n_classes,
        lazy=False,
    )


def _lazy_memory_estimate(det: _Determinizer) -> int:
    # rough per-state dict/frozenset overhead for the resident cache
    return det.n_states() * 200 + 256 * 4


def set_stats(cset: CompiledPatternSet) -> dict[str, int]:
    return {
        "state_count": cset.stats.state_count,
        "memory_bytes_estimate": cset.stats.memory_bytes_estimate,
    }
