"""Multi-pattern regex engine: one DFA, one pass, tagged matches."""

from .parser import (
    parse_regex,
    RegexError,
    RegexSyntaxError,
    UnsupportedConstructError,
)
from .compiler import (
    compile_set,
    set_stats,
    CompiledPatternSet,
    SetStats,
    StateBudgetError,
    DEFAULT_STATE_BUDGET,
)
from .matcher import scan, RawMatch, warmup

__all__ = [
    "parse_regex",
    "compile_set",
    "scan",
    "set_stats",
    "warmup",
    "RawMatch",
    "CompiledPatternSet",
    "SetStats",
    "RegexError",
    "RegexSyntaxError",
    "UnsupportedConstructError",
    "StateBudgetError",
    "DEFAULT_STATE_BUDGET",
]
