"""Operational-semantics gates: parse errors and protected-token preservation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from varmark.errors import UnparseableInput
from varmark.lang import java
from varmark.lang.parser import FunctionUnit, parse_function


@dataclass
class CheckReport:
    ast_ok: bool
    keyword_ok: bool
    diagnostics: list[tuple[tuple[int, int], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.ast_ok and self.keyword_ok

    def to_dict(self) -> dict:
        return {
            "ast_ok": self.ast_ok,
            "keyword_ok": self.keyword_ok,
            "diagnostics": [{"span": list(s), "message": m} for s, m in self.diagnostics],
        }


def syntax_diagnostics(fn: FunctionUnit) -> list[tuple[tuple[int, int], str]]:
    out = []
    for n in fn.error_nodes():
        what = f"missing {n.kind!r}" if n.is_missing else "syntax error"
        out.append(((n.start, n.end), what))
    return out


def ast_check(source: str, language: str = "java") -> bool:
    try:
        fn = parse_function(source, language)
    except UnparseableInput:
        return False
    return not fn.has_error


def protected_token_counts(fn: FunctionUnit) -> Counter:
    protected = java.protected_names()
    skip = java.COMMENT_KINDS | java.STRING_KINDS
    return Counter(t.text for t in fn.tokens if t.kind not in skip and t.text in protected)


def keyword_check(original: str, watermarked: str, language: str = "java") -> bool:
    """True iff reserved words and protected class names occur identically often."""
    a = protected_token_counts(parse_function(original, language))
    b = protected_token_counts(parse_function(watermarked, language))
    return a == b


def check_pair(original: str, watermarked: str, language: str = "java") -> CheckReport:
    wm = parse_function(watermarked, language)
    diags = syntax_diagnostics(wm)
    kw = keyword_check(original, watermarked, language)
    if not kw:
        diags.append(((0, len(wm.data)), "protected token multiset changed"))
    return CheckReport(ast_ok=not wm.has_error, keyword_ok=kw, diagnostics=diags)
