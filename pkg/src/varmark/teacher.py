"""Soft-label teachers for the naturalness loss.

The corpus teacher is a small count model standing in for a masked language
model. Position 0 of a name is predicted from the tokens around each
occurrence; later positions from a bigram over name subtokens. Labels from an
external model can be loaded from JSON lines instead.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from varmark import _accel
from varmark.errors import EmptyCorpus, NoStatementContext, SchemaError, TeacherUnavailable
from varmark.graph import enclosing_statement
from varmark.lang.parser import FunctionUnit
from varmark.lang.scope import VariableBinding, list_variables
from varmark.lang.subtoken import subtokenize

END = "<end>"
TRUNCATE_TOKENS = 510
DEFAULT_K = 20
BOUNDARY = "<s>"


@dataclass(frozen=True)
class SoftLabel:
    """Per-position distributions, each a tuple of (subtoken, prob) sorted by prob."""

    positions: tuple[tuple[tuple[str, float], ...], ...]
    k: int

    def __len__(self) -> int:
        return len(self.positions)

    def dense(self, index: dict[str, int], size: int, steps: int) -> np.ndarray:
        """(steps, size) matrix; unknown tokens are dropped and rows renormalized."""
        out = np.zeros((steps, size), dtype=np.float64)
        for t, row in enumerate(self.positions[:steps]):
            for tok, p in row:
                j = index.get(tok)
                if j is not None:
                    out[t, j] += p
            s = out[t].sum()
            if s > 0:
                out[t] /= s
        return out


def top_k(dist: dict[str, float], k: int) -> tuple[tuple[str, float], ...]:
    """Keep the k most probable entries and renormalize them.

    The renormalization is a softmax over the kept log-probabilities, which
    equals dividing by their sum.
    """
    if k < 1:
        raise ValueError("k must be positive")
    kept = sorted(((w, p) for w, p in dist.items() if p > 0), key=lambda x: (-x[1], x[0]))[:k]
    if not kept:
        return ()
    logs = np.log([p for _, p in kept])
    soft = np.exp(logs - logs.max())
    soft /= soft.sum()
    return tuple((w, float(q)) for (w, _), q in zip(kept, soft))


def average(dists: list[dict[str, float]]) -> dict[str, float]:
    out: dict[str, float] = defaultdict(float)
    for d in dists:
        for w, p in d.items():
            out[w] += p / len(dists)
    return dict(out)


def _context(fn: FunctionUnit, token_index: int) -> tuple[str, str]:
    """Nearest non-comment tokens left and right of an occurrence."""
    code = [i for i, t in enumerate(fn.tokens) if t.kind not in ("line_comment", "block_comment")]
    pos = code.index(token_index)
    left = fn.tokens[code[pos - 1]].text if pos > 0 else BOUNDARY
    right = fn.tokens[code[pos + 1]].text if pos + 1 < len(code) else BOUNDARY
    return left, right


class CorpusTeacher:
    """Count model over variable-name subtokens."""

    def __init__(self, vocab: list[str], left: dict, right: dict, bigram: np.ndarray):
        self.vocab = vocab  # name subtokens; END is appended for bigram rows/cols
        self.index = {w: i for i, w in enumerate(vocab)}
        self.left = left  # context token -> Counter(first subtoken)
        self.right = right
        self.bigram = bigram  # (V+1, V+1) counts, last index = END

    @property
    def size(self) -> int:
        return len(self.vocab)

    def context_distribution(self, left: str, right: str) -> dict[str, float]:
        """P(first subtoken | left, right), a product of add-one smoothed conditionals."""
        v = self.size
        lc, rc = self.left.get(left, Counter()), self.right.get(right, Counter())
        ln, rn = sum(lc.values()), sum(rc.values())
        scores = np.array(
            [(lc[w] + 1) / (ln + v) * (rc[w] + 1) / (rn + v) for w in self.vocab], dtype=np.float64
        )
        scores /= scores.sum()
        return dict(zip(self.vocab, scores.tolist()))

    def next_distribution(self, prev: str) -> dict[str, float]:
        """P(next subtoken or END | prev) with add-one smoothing."""
        syms = self.vocab + [END]
        i = self.index.get(prev)
        row = self.bigram[i] if i is not None else np.zeros(len(syms), dtype=np.int64)
        probs = (row + 1.0) / (row.sum() + len(syms))
        return dict(zip(syms, probs.tolist()))

    def position0(self, fn: FunctionUnit, b: VariableBinding) -> dict[str, float]:
        """Statement-averaged first-position distribution (before the top-k cut)."""
        per_stmt: dict[int, list[dict[str, float]]] = {}
        for tok in b.occurrences:
            if tok >= TRUNCATE_TOKENS:
                continue
            s = enclosing_statement(fn, fn.leaf(tok).index)
            if s is None:
                continue
            per_stmt.setdefault(s, []).append(self.context_distribution(*_context(fn, tok)))
        if not per_stmt:
            raise NoStatementContext(f"{b.name!r} has no statement within the first {TRUNCATE_TOKENS} tokens")
        return average([average(v) for _, v in sorted(per_stmt.items())])

    def soft_labels(self, fn: FunctionUnit, b: VariableBinding, k: int = DEFAULT_K, max_len: int = 5) -> SoftLabel:
        positions = [top_k(self.position0(fn, b), k)]
        subs = subtokenize(b.name)[:max_len]
        for prev in subs:
            positions.append(top_k(self.next_distribution(prev), k))
        return SoftLabel(tuple(positions), k)


def train_corpus_teacher(functions: Iterable[FunctionUnit]) -> CorpusTeacher:
    left: dict[str, Counter] = defaultdict(Counter)
    right: dict[str, Counter] = defaultdict(Counter)
    names: list[list[str]] = []
    for fn in functions:
        for b in list_variables(fn):
            subs = subtokenize(b.name)
            names.append(subs)
            for tok in b.occurrences:
                if tok >= TRUNCATE_TOKENS:
                    continue
                lt, rt = _context(fn, tok)
                left[lt][subs[0]] += 1
                right[rt][subs[0]] += 1
    if not names:
        raise EmptyCorpus("no variables found in the teacher corpus")
    vocab = sorted({s for subs in names for s in subs})
    index = {w: i for i, w in enumerate(vocab)}
    end = len(vocab)
    prev, nxt = [], []
    for subs in names:
        ids = [index[s] for s in subs] + [end]
        prev.extend(ids[:-1])
        nxt.extend(ids[1:])
    bigram = _accel.bigram_counts(np.array(prev), np.array(nxt), len(vocab) + 1)
    return CorpusTeacher(vocab, dict(left), dict(right), bigram)


class LabelStore:
    """Soft labels keyed by (function id, variable ordinal), with a fallback teacher."""

    def __init__(self, labels: dict[tuple[str, int], SoftLabel] | None = None, fallback: CorpusTeacher | None = None):
        self.labels = dict(labels or {})
        self.fallback = fallback

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, key) -> bool:
        return key in self.labels

    def get(self, fn: FunctionUnit, b: VariableBinding, k: int = DEFAULT_K, max_len: int = 5) -> SoftLabel:
        hit = self.labels.get((fn.id, b.ordinal))
        if hit is not None:
            return hit
        if self.fallback is None:
            raise TeacherUnavailable(f"no label for ({fn.id!r}, {b.ordinal}) and no fallback teacher")
        return self.fallback.soft_labels(fn, b, k, max_len)


def load_exported_labels(path: str | Path, fallback: CorpusTeacher | None = None, tol: float = 1e-4) -> LabelStore:
    labels: dict[tuple[str, int], SoftLabel] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{where}: {e}") from None
            if not isinstance(obj, dict):
                raise SchemaError(f"{where}: expected an object")
            fn_id, ordinal, positions = obj.get("fn_id"), obj.get("var_ordinal"), obj.get("positions")
            if not isinstance(fn_id, str) or type(ordinal) is not int or ordinal < 0:
                raise SchemaError(f"{where}: bad fn_id/var_ordinal")
            if not isinstance(positions, list) or not positions:
                raise SchemaError(f"{where}: positions must be a non-empty list")
            rows = []
            width = 0
            for row in positions:
                if not isinstance(row, list) or not row:
                    raise SchemaError(f"{where}: each position must be a non-empty list")
                entries = []
                for pair in row:
                    if (
                        not isinstance(pair, (list, tuple))
                        or len(pair) != 2
                        or not isinstance(pair[0], str)
                        or not isinstance(pair[1], (int, float))
                        or isinstance(pair[1], bool)
                        or not math.isfinite(pair[1])
                        or pair[1] < 0
                    ):
                        raise SchemaError(f"{where}: entries must be [token, prob>=0]")
                    entries.append((pair[0], float(pair[1])))
                if len({t for t, _ in entries}) != len(entries):
                    raise SchemaError(f"{where}: repeated token within a position")
                if abs(sum(p for _, p in entries) - 1.0) > tol:
                    raise SchemaError(f"{where}: probabilities sum to {sum(p for _, p in entries):.6f}")
                width = max(width, len(entries))
                rows.append(tuple(sorted(entries, key=lambda x: (-x[1], x[0]))))
            key = (fn_id, ordinal)
            if key in labels:
                raise SchemaError(f"{where}: duplicate key {key}")
            labels[key] = SoftLabel(tuple(rows), width)
    return LabelStore(labels, fallback)


def export_labels(path: str | Path, items: Iterable[tuple[str, int, SoftLabel]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for fn_id, ordinal, label in items:
            obj = {"fn_id": fn_id, "var_ordinal": ordinal, "positions": [[list(e) for e in row] for row in label.positions]}
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
