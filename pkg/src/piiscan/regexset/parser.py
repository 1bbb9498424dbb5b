"""Regex front end: a linear-time dialect parsed into a small AST.

Supported: literals, character classes, ``\\d \\w \\s`` (and negations),
``.``, concatenation, alternation, bounded and unbounded repetition,
non-capturing groups, ``^ $`` text anchors and the ``\\b`` word boundary.
Backreferences, lookaround and capture semantics are rejected by name so a
glossary author learns immediately which construct their pattern leans on.

Matching is byte-oriented over UTF-8; shorthand classes are ASCII-only.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_REPEAT = 255

# 256-bit masks for the byte classes used by shorthands
_ALL = (1 << 256) - 1


def _mask_of(chars: str) -> int:
    m = 0
    for ch in chars:
        m |= 1 << ord(ch)
    return m


DIGIT_MASK = _mask_of("0123456789")
WORD_MASK = _mask_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
SPACE_MASK = _mask_of(" \t\n\r\f\v")
DOT_MASK = _ALL & ~(1 << 0x0A)  # any byte except newline

TEXT_START = "text_start"
TEXT_END = "text_end"
WORD_BOUNDARY = "word_boundary"


class RegexError(ValueError):
    """Base class for pattern front-end failures."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.message = message


class RegexSyntaxError(RegexError):
    pass


class UnsupportedConstructError(RegexError):
    def __init__(self, construct: str, position: int):
        super().__init__(f"unsupported construct: {construct}", position)
        self.construct = construct


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Empty(Node):
    pass


@dataclass(frozen=True)
class Lit(Node):
    byte: int


@dataclass(frozen=True)
class Klass(Node):
    """One byte drawn from ``mask`` (a 256-bit membership bitmask)."""

    mask: int


@dataclass(frozen=True)
class Cat(Node):
    parts: tuple[Node, ...]


@dataclass(frozen=True)
class Alt(Node):
    branches: tuple[Node, ...]


@dataclass(frozen=True)
class Repeat(Node):
    node: Node
    lo: int
    hi: int | None  # None = unbounded


@dataclass(frozen=True)
class Group(Node):
    node: Node


@dataclass(frozen=True)
class Assert(Node):
    kind: str  # TEXT_START | TEXT_END | WORD_BOUNDARY


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def error(self, message: str) -> RegexSyntaxError:
        return RegexSyntaxError(message, self.pos)

    def peek(self) -> str | None:
        return self.src[self.pos] if self.pos < len(self.src) else None

    def take(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        return ch

    # --- grammar: alt -> cat ('|' cat)* ; cat -> repeated* ; repeated -> atom quant*

    def parse(self) -> Node:
        node = self.parse_alt()
        if self.pos != len(self.src):
            raise self.error(f"unexpected {self.src[self.pos]!r}")
        return node

    def parse_alt(self) -> Node:
        branches = [self.parse_cat()]
        while self.peek() == "|":
            self.take()
            branches.append(self.parse_cat())
        if len(branches) == 1:
            return branches[0]
        return Alt(tuple(branches))

    def parse_cat(self) -> Node:
        parts: list[Node] = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)":
                break
            parts.append(self.parse_repeated())
        if not parts:
            return Empty()
        if len(parts) == 1:
            return parts[0]
        return Cat(tuple(parts))

    def parse_repeated(self) -> Node:
        node = self.parse_atom()
        while True:
            ch = self.peek()
            if ch == "*":
                self.take()
                node = Repeat(node, 0, None)
            elif ch == "+":
                self.take()
                node = Repeat(node, 1, None)
            elif ch == "?":
                self.take()
                node = Repeat(node, 0, 1)
            elif ch == "{":
                node = self.parse_counted(node)
            else:
                return node

    def parse_counted(self, node: Node) -> Node:
        open_pos = self.pos
        self.take()  # '{'
        digits = ""
        while self.peek() is not None and self.peek().isdigit():
            digits += self.take()
        if digits == "" and self.peek() != ",":
            self.pos = open_pos
            raise self.error("bare '{' is not a repetition (escape it as \\{)")
        lo = int(digits) if digits else 0
        hi: int | None
        if self.peek() == ",":
            self.take()
            digits = ""
            while self.peek() is not None and self.peek().isdigit():
                digits += self.take()
            hi = int(digits) if digits else None
        else:
            hi = lo
        if self.peek() != "}":
            self.pos = open_pos
            raise self.error("unterminated repetition count")
        self.take()
        if hi is not None and lo > hi:
            self.pos = open_pos
            raise self.error(f"repetition range {{{lo},{hi}}} has lo > hi")
        if lo > MAX_REPEAT or (hi is not None and hi > MAX_REPEAT):
            self.pos = open_pos
            raise self.error(f"repetition count above {MAX_REPEAT}")
        return Repeat(node, lo, hi)

    def parse_atom(self) -> Node:
        ch = self.peek()
        if ch is None:
            return Empty()
        if ch in "*+?":
            raise self.error(f"quantifier {ch!r} with nothing to repeat")
        if ch == "(":
            return self.parse_group()
        if ch == "[":
            return self.parse_class()
        if ch == "^":
            self.take()
            return Assert(TEXT_START)
        if ch == "$":
            self.take()
            return Assert(TEXT_END)
        if ch == "\\":
            return self.parse_escape()
        self.take()
        return _literal(ch)

    def parse_group(self) -> Node:
        self.take()  # '('
        if self.peek() == "?":
            mark = self.pos
            self.take()
            nxt = self.peek()
            if nxt == ":":
                self.take()
            elif nxt in ("=", "!"):
                raise UnsupportedConstructError("lookahead", mark)
            elif nxt == "<":
                self.take()
                if self.peek() in ("=", "!"):
                    raise UnsupportedConstructError("lookbehind", mark)
                raise UnsupportedConstructError("named capture group", mark)
            elif nxt == "P":
                self.take()
                if self.peek() == "=":
                    raise UnsupportedConstructError("named backreference", mark)
                raise UnsupportedConstructError("named capture group", mark)
            else:
                raise UnsupportedConstructError("inline flags", mark)
        inner = self.parse_alt()
        if self.peek() != ")":
            raise self.error("unbalanced parenthesis")
        self.take()
        return Group(inner)

    def parse_escape(self) -> Node:
        mark = self.pos
        self.take()  # backslash
        ch = self.peek()
        if ch is None:
            raise RegexSyntaxError("trailing backslash", mark)
        self.take()
        if ch.isdigit():
            if ch == "0":
                return Lit(0)
            raise UnsupportedConstructError("backreference", mark)
        if ch == "b":
            return Assert(WORD_BOUNDARY)
        if ch == "B":
            raise UnsupportedConstructError("negated word boundary", mark)
        mask = _escape_class_mask(ch)
        if mask is not None:
            return Klass(mask)
        byte = _escape_literal(ch)
        if byte is not None:
            return Lit(byte)
        if ch == "x":
            return Lit(self.parse_hex(mark))
        if ch.isalpha():
            raise RegexSyntaxError(f"unknown escape \\{ch}", mark)
        return _literal(ch)

    def parse_hex(self, mark: int) -> int:
        digits = ""
        for _ in range(2):
            ch = self.peek()
            if ch is None or ch not in "0123456789abcdefABCDEF":
                raise RegexSyntaxError("\\x expects two hex digits", mark)
            digits += self.take()
        return int(digits, 16)

    def parse_class(self) -> Node:
        open_pos = self.pos
        self.take()  # '['
        if self.src[self.pos : self.pos + 2] == "[:":
            raise UnsupportedConstructError("POSIX character class", self.pos)
        negated = False
        if self.peek() == "^":
            negated = True
            self.take()
        mask = 0
        first = True
        while True:
            ch = self.peek()
            if ch is None:
                self.pos = open_pos
                raise self.error("unterminated character class")
            if ch == "]" and not first:
                self.take()
                break
            first = False
            lo_mask, lo_byte = self.parse_class_item()
            if lo_byte is not None and self.peek() == "-" and self.src[self.pos + 1 : self.pos + 2] not in ("]", ""):
                self.take()  # '-'
                hi_mask, hi_byte = self.parse_class_item()
                if hi_byte is None:
                    self.pos = open_pos
                    raise self.error("character range endpoint cannot be a class")
                if lo_byte > hi_byte:
                    self.pos = open_pos
                    raise self.error("invalid character range (lo > hi)")
                for b in range(lo_byte, hi_byte + 1):
                    mask |= 1 << b
            elif lo_byte is not None:
                mask |= 1 << lo_byte
            else:
                mask |= lo_mask
        if negated:
            mask = _ALL & ~mask
        if mask == 0:
            self.pos = open_pos
            raise self.error("empty character class")
        return Klass(mask)

    def parse_class_item(self) -> tuple[int, int | None]:
        """One class member: returns (mask, byte) with byte set for single bytes."""
        ch = self.take()
        if ch == "\\":
            mark = self.pos - 1
            esc = self.peek()
            if esc is None:
                raise RegexSyntaxError("trailing backslash in class", mark)
            self.take()
            mask = _escape_class_mask(esc)
            if mask is not None:
                return mask, None
            byte = _escape_literal(esc)
            if byte is not None:
                return 0, byte
            if esc == "x":
                return 0, self.parse_hex(mark)
            if esc == "b":
                return 0, 0x08  # backspace inside a class
            if esc.isalpha():
                raise RegexSyntaxError(f"unknown escape \\{esc} in class", mark)
            return 0, _checked_byte(esc, mark)
        return 0, _checked_byte(ch, self.pos - 1)


def _checked_byte(ch: str, pos: int) -> int:
    code = ord(ch)
    if code > 0x7F:
        raise UnsupportedConstructError("non-ASCII character class", pos)
    return code


def _escape_class_mask(ch: str) -> int | None:
    if ch == "d":
        return DIGIT_MASK
    if ch == "D":
        return _ALL & ~DIGIT_MASK
    if ch == "w":
        return WORD_MASK
    if ch == "W":
        return _ALL & ~WORD_MASK
    if ch == "s":
        return SPACE_MASK
    if ch == "S":
        return _ALL & ~SPACE_MASK
    return None


def _escape_literal(ch: str) -> int | None:
    table = {"n": 0x0A, "r": 0x0D, "t": 0x09, "f": 0x0C, "v": 0x0B, "a": 0x07, "e": 0x1B}
    if ch in table:
        return table[ch]
    if ch in ".^$*+?{}[]()|\\-/'\"`,;:<>=!#%&@_~ ":
        return ord(ch)
    return None


def _literal(ch: str) -> Node:
    if ch == ".":
        return Klass(DOT_MASK)
    code = ord(ch)
    if code <= 0x7F:
        return Lit(code)
    # non-ASCII literal: match its UTF-8 byte sequence
    encoded = ch.encode("utf-8")
    return Cat(tuple(Lit(b) for b in encoded))


def _check_nested_unbounded(node: Node, inside_unbounded: bool, source: str) -> None:
    if isinstance(node, Repeat):
        unbounded = node.hi is None
        if unbounded and inside_unbounded:
            raise UnsupportedConstructError("nested unbounded repetition", 0)
        _check_nested_unbounded(node.node, inside_unbounded or unbounded, source)
    elif isinstance(node, (Cat, Alt)):
        children = node.parts if isinstance(node, Cat) else node.branches
        for child in children:
            _check_nested_unbounded(child, inside_unbounded, source)
    elif isinstance(node, Group):
        _check_nested_unbounded(node.node, inside_unbounded, source)


def parse_regex(source: str) -> Node:
    """Parse ``source`` into an AST, rejecting everything outside the dialect."""
    if not source:
        raise RegexSyntaxError("empty pattern", 0)
    node = _Parser(source).parse()
    _check_nested_unbounded(node, False, source)
    return node


def can_match_empty(node: Node) -> bool:
    """Whether the language of ``node`` contains the empty string."""
    if isinstance(node, (Empty, Assert)):
        return True
    if isinstance(node, Lit) or isinstance(node, Klass):
        return False
    if isinstance(node, Cat):
        return all(can_match_empty(p) for p in node.parts)
    if isinstance(node, Alt):
        return any(can_match_empty(b) for b in node.branches)
    if isinstance(node, Repeat):
        return node.lo == 0 or can_match_empty(node.node)
    if isinstance(node, Group):
        return can_match_empty(node.node)
    raise TypeError(f"unknown node {node!r}")
