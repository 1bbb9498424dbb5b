"""Single-pass scanning over a compiled pattern set.

Semantics: for every byte position s and every member whose regex matches
starting at s, report the longest match for that (member, s) pair.
Overlaps across members are kept; zero-length matches are discarded.

All active start positions advance in lockstep over one pass of the text,
so no byte is re-read within a pass. The numba kernel is the throughput
path (eager sets); a dict-based Python walk implements identical
semantics for lazy sets and as a JIT-free fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .compiler import CompiledPatternSet
from .parser import WORD_MASK

_WORD_BYTE = np.array([(WORD_MASK >> b) & 1 for b in range(256)], dtype=np.bool_)

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco if not (args and callable(args[0])) else args[0]


def _jit_enabled() -> bool:
    return _HAVE_NUMBA and os.environ.get("PIISCAN_NO_JIT", "") not in ("1", "true", "yes")


@dataclass(frozen=True)
class RawMatch:
    """A located regex-set hit, tagged with the member that produced it."""

    member_id: int
    pattern_id: str
    start: int
    end: int
    text: str


@njit(cache=True, nogil=True)
def _scan_kernel(table, acc_off, acc_mem, alive, cls_arr, q0_arr, dead, eoi):  # pragma: no cover - jit
    n = cls_arr.shape[0]
    cap = 64
    th_state = np.empty(cap, np.int32)
    th_start = np.empty(cap, np.int64)
    n_active = 0
    ev_cap = 1024
    ev_member = np.empty(ev_cap, np.int32)
    ev_start = np.empty(ev_cap, np.int64)
    ev_end = np.empty(ev_cap, np.int64)
    n_ev = 0
    i = 0
    while i < n:
        c = cls_arr[i]
        if n_active == 0:
            # fast path: skip ahead to the next surviving seed
            st = table[q0_arr[i], c]
            if not alive[st]:
                i += 1
                while i < n and not alive[table[q0_arr[i], cls_arr[i]]]:
                    i += 1
                continue
            th_state[0] = st
            th_start[0] = i
            n_active = 1
            i += 1
            continue
        w = 0
        for t in range(n_active):
            st = table[th_state[t], c]
            a0 = acc_off[st]
            a1 = acc_off[st + 1]
            if a1 > a0:
                for k in range(a0, a1):
                    if n_ev >= ev_cap:
                        ev_cap *= 2
                        tmp_m = np.empty(ev_cap, np.int32)
                        tmp_m[:n_ev] = ev_member[:n_ev]
                        ev_member = tmp_m
                        tmp_s = np.empty(ev_cap, np.int64)
                        tmp_s[:n_ev] = ev_start[:n_ev]
                        ev_start = tmp_s
                        tmp_e = np.empty(ev_cap, np.int64)
                        tmp_e[:n_ev] = ev_end[:n_ev]
                        ev_end = tmp_e
                    ev_member[n_ev] = acc_mem[k]
                    ev_start[n_ev] = th_start[t]
                    ev_end[n_ev] = i
                    n_ev += 1
            if alive[st]:
                th_state[w] = st
                th_start[w] = th_start[t]
                w += 1
        n_active = w
        # seed a thread starting at i (its accepts here would be zero-length)
        st = table[q0_arr[i], c]
        if alive[st]:
            if n_active >= cap:
                cap *= 2
                tmp = np.empty(cap, np.int32)
                tmp[:n_active] = th_state[:n_active]
                th_state = tmp
                tmp2 = np.empty(cap, np.int64)
                tmp2[:n_active] = th_start[:n_active]
                th_start = tmp2
            th_state[n_active] = st
            th_start[n_active] = i
            n_active += 1
        i += 1
    # virtual end-of-input symbol resolves trailing assertions
    for t in range(n_active):
        st = table[th_state[t], eoi]
        a0 = acc_off[st]
        a1 = acc_off[st + 1]
        for k in range(a0, a1):
            if n_ev >= ev_cap:
                ev_cap *= 2
                tmp_m = np.empty(ev_cap, np.int32)
                tmp_m[:n_ev] = ev_member[:n_ev]
                ev_member = tmp_m
                tmp_s = np.empty(ev_cap, np.int64)
                tmp_s[:n_ev] = ev_start[:n_ev]
                ev_start = tmp_s
                tmp_e = np.empty(ev_cap, np.int64)
                tmp_e[:n_ev] = ev_end[:n_ev]
                ev_end = tmp_e
            ev_member[n_ev] = acc_mem[k]
            ev_start[n_ev] = th_start[t]
            ev_end[n_ev] = n
            n_ev += 1
    return ev_member[:n_ev], ev_start[:n_ev], ev_end[:n_ev]


def _seed_states(cset: CompiledPatternSet, data: np.ndarray) -> np.ndarray:
    n = data.shape[0]
    q0 = np.empty(n, dtype=np.int32)
    if n == 0:
        return q0
    q0[0] = cset.q0_begin
    if n > 1:
        prev_word = _WORD_BYTE[data[:-1]]
        q0[1:] = np.where(prev_word, cset.q0_word, cset.q0_nonword)
    return q0


def _scan_events_jit(cset: CompiledPatternSet, data: bytes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.frombuffer(data, dtype=np.uint8)
    cls_arr = cset.class_of[arr]
    q0_arr = _seed_states(cset, arr)
    return _scan_kernel(
        cset.table,
        cset.accept_offsets,
        cset.accept_members,
        cset.alive,
        cls_arr,
        q0_arr,
        np.int32(cset.dead),
        np.int64(cset.n_classes),
    )


def _scan_best_python(cset: CompiledPatternSet, data: bytes) -> dict[tuple[int, int], int]:
    n = len(data)
    best: dict[tuple[int, int], int] = {}
    if n == 0:
        return best

    if cset.lazy:
        lazy = cset._lazy
        trans = lazy.transition
        accepts_of = lazy.accepts
        is_alive = lazy.alive
    else:
        table = cset.table
        acc_off = cset.accept_offsets
        acc_mem = cset.accept_members
        alive_arr = cset.alive

        def trans(s: int, c: int) -> int:
            return int(table[s, c])

        def accepts_of(s: int) -> tuple[int, ...]:
            return tuple(int(m) for m in acc_mem[acc_off[s] : acc_off[s + 1]])

        def is_alive(s: int) -> bool:
            return bool(alive_arr[s])

    class_of = cset.class_of
    word = _WORD_BYTE
    active: dict[int, list[int]] = {}
    for i in range(n):
        c = int(class_of[data[i]])
        new_active: dict[int, list[int]] = {}
        for state, starts in active.items():
            t = trans(state, c)
            for m in accepts_of(t):
                for s in starts:
                    best[(m, s)] = i
            if is_alive(t):
                new_active.setdefault(t, []).extend(starts)
        if i == 0:
            q0 = cset.q0_begin
        elif word[data[i - 1]]:
            q0 = cset.q0_word
        else:
            q0 = cset.q0_nonword
        t = trans(q0, c)
        if is_alive(t):
            new_active.setdefault(t, []).append(i)
        active = new_active
    eoi = cset.n_classes
    for state, starts in active.items():
        t = trans(state, eoi)
        for m in accepts_of(t):
            for s in starts:
                best[(m, s)] = n
    return best


def scan(cset: CompiledPatternSet, text: bytes | str) -> list[RawMatch]:
    """All (member, start)-longest matches of the set in ``text``.

    Results are sorted by (start, pattern_id); empty input yields [].
    """
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    if not data:
        return []

    if cset.table is not None and _jit_enabled():
        members, starts, ends = _scan_events_jit(cset, data)
        best: dict[tuple[int, int], int] = {}
        if len(members):
            order = np.lexsort((ends, starts, members))
            m = members[order]
            s = starts[order]
            e = ends[order]
            last = np.ones(len(m), dtype=np.bool_)
            last[:-1] = (m[1:] != m[:-1]) | (s[1:] != s[:-1])
            for mm, ss, ee in zip(m[last], s[last], e[last]):
                best[(int(mm), int(ss))] = int(ee)
    else:
        best = _scan_best_python(cset, data)

    matches = []
    for (member, start), end in best.items():
        if end <= start:
            continue  # zero-length matches are not reportable
        pid = cset.member_table[member][0]
        matches.append(
            RawMatch(
                member_id=member,
                pattern_id=pid,
                start=start,
                end=end,
                text=data[start:end].decode("utf-8", errors="replace"),
            )
        )
    matches.sort(key=lambda m: (m.start, m.pattern_id, m.end, m.member_id))
    return matches


def warmup() -> None:
    """Force JIT compilation of the scan kernel (useful before timing runs)."""
    if not _jit_enabled():
        return
    from . import parser, compiler

    cset = compiler.compile_set([("w", parser.parse_regex("x"))])
    scan(cset, b"axa")
