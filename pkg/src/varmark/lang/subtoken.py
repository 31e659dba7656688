"""Identifier splitting and re-rendering in different naming styles."""

from __future__ import annotations

import re
from dataclasses import dataclass

IDENTIFIER_RE = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")

# Acronym runs, capitalised words, lowercase runs, digit runs.
_PIECE_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")

STYLES = ("camel", "pascal", "snake", "underscore_init")


@dataclass(frozen=True)
class SplitName:
    """Subtokens plus what is needed to rebuild the original spelling.

    ``"".join(s + p for s, p in zip(separators, pieces)) + trailer`` gives the
    original name back; ``subtokens`` are the lowercased pieces.
    """

    pieces: tuple[str, ...]
    separators: tuple[str, ...]
    trailer: str = ""

    @property
    def subtokens(self) -> list[str]:
        return [p.lower() for p in self.pieces]

    def recombine(self) -> str:
        return "".join(s + p for s, p in zip(self.separators, self.pieces)) + self.trailer


def split_name(name: str) -> SplitName:
    pieces: list[str] = []
    seps: list[str] = []
    pos = 0
    for m in _PIECE_RE.finditer(name):
        seps.append(name[pos : m.start()])
        pieces.append(m.group())
        pos = m.end()
    return SplitName(tuple(pieces), tuple(seps), name[pos:])


def subtokenize(name: str) -> list[str]:
    """``userDetails`` -> ``['user', 'details']``; ``a2`` -> ``['a', '2']``."""
    subs = split_name(name).subtokens
    return subs if subs else [name.lower()]


def is_identifier(name: str) -> bool:
    return bool(IDENTIFIER_RE.match(name))


def render(subtokens: list[str], style: str = "camel") -> str:
    if not subtokens:
        raise ValueError("cannot render an empty name")
    if style == "camel":
        return subtokens[0] + "".join(s.capitalize() for s in subtokens[1:])
    if style == "pascal":
        return "".join(s.capitalize() for s in subtokens)
    if style == "snake":
        return "_".join(subtokens)
    if style == "underscore_init":
        return "_" + "_".join(subtokens)
    raise ValueError(f"unknown naming style {style!r}")


def naming_style(name: str) -> str:
    if name.startswith("_"):
        return "underscore_init"
    if "_" in name:
        return "snake"
    if name[:1].isupper():
        return "pascal"
    return "camel"
