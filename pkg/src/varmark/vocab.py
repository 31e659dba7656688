"""Vocabularies for node kinds, token subtokens and generated name subtokens."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from varmark.lang import java
from varmark.lang.parser import FunctionUnit
from varmark.lang.scope import list_variables
from varmark.lang.subtoken import is_identifier, subtokenize

UNK = "<unk>"
MASK = "<mask>"
END = "<end>"

_WORD_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*|\d+")
MAX_PIECES = 6


class Vocabulary:
    def __init__(self, symbols: Iterable[str]):
        self.symbols = list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}
        if len(self.index) != len(self.symbols):
            raise ValueError("duplicate vocabulary symbols")

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, sym: str) -> bool:
        return sym in self.index

    def __getitem__(self, sym: str) -> int:
        return self.index.get(sym, self.index.get(UNK, 0))

    def lookup(self, i: int) -> str:
        return self.symbols[i]


def token_pieces(text: str, kind: str) -> list[str]:
    """Feature subtokens of a leaf token."""
    if kind in java.STRING_KINDS or kind in java.COMMENT_KINDS:
        pieces = [p for w in _WORD_RE.findall(text) for p in subtokenize(w)]
        return pieces[:MAX_PIECES] or [kind]
    if is_identifier(text):
        return subtokenize(text)[:MAX_PIECES]
    return [text] if text else [kind]


@dataclass
class Vocabs:
    kinds: Vocabulary
    pieces: Vocabulary  # feature subtokens; index 0 = UNK, 1 = MASK
    names: Vocabulary  # decoder output; index 0 = END, 1 = UNK

    @property
    def end_id(self) -> int:
        return 0

    @property
    def unk_name_id(self) -> int:
        return 1

    def name_to_piece(self) -> list[int]:
        """Piece index of every name symbol (END and UNK map to UNK)."""
        return [self.pieces[s] for s in self.names.symbols]

    def to_json(self) -> dict:
        return {"kinds": self.kinds.symbols, "pieces": self.pieces.symbols, "names": self.names.symbols}

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabs":
        return cls(Vocabulary(obj["kinds"]), Vocabulary(obj["pieces"]), Vocabulary(obj["names"]))

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def build_vocabs(functions: Iterable[FunctionUnit], min_piece_count: int = 1, max_names: int = 2000) -> Vocabs:
    kinds: Counter = Counter()
    pieces: Counter = Counter()
    names: Counter = Counter()
    for fn in functions:
        for n in fn.nodes:
            kinds[n.kind] += 1
        for t in fn.tokens:
            pieces.update(token_pieces(t.text, t.kind))
        for b in list_variables(fn):
            names.update(subtokenize(b.name))
    kind_syms = [UNK] + sorted(kinds)
    piece_syms = [UNK, MASK] + sorted(p for p, c in pieces.items() if c >= min_piece_count and p not in (UNK, MASK))
    top_names = sorted(names, key=lambda s: (-names[s], s))[:max_names]
    name_syms = [END, UNK] + sorted(top_names)
    # every name subtoken must also be a feature piece
    extra = [s for s in name_syms[2:] if s not in set(piece_syms)]
    return Vocabs(Vocabulary(kind_syms), Vocabulary(piece_syms + extra), Vocabulary(name_syms))
