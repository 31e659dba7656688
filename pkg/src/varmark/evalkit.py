"""Metrics and the benchmark harness."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from varmark import _accel
from varmark.errors import LengthMismatch, UntrainedModel, VarmarkError
from varmark.lang.parser import FunctionUnit, parse_function
from varmark.lang.scope import list_variables
from varmark.lang.subtoken import subtokenize


def bit_accuracy(truth: Sequence[int], got: Sequence[int]) -> float:
    if len(truth) != len(got):
        raise LengthMismatch(f"{len(truth)} truth bits vs {len(got)} extracted")
    if not truth:
        raise LengthMismatch("empty bit strings")
    return sum(int(a) == int(b) for a, b in zip(truth, got)) / len(truth)


def bits_per_token(reports) -> float:
    """Embedded bits per code token; a sequence of reports gives the mean over functions."""
    if hasattr(reports, "bits_embedded"):
        return reports.bits_embedded / reports.tokens
    values = [r.bits_embedded / r.tokens for r in reports]
    return float(np.mean(values)) if values else 0.0


def _trigrams(name: str) -> Counter:
    s = "#" + "".join(subtokenize(name)) + "#"
    return Counter(s[i : i + 3] for i in range(len(s) - 2))


def var_sim_proxy(orig: str, new: str) -> float:
    """Name-similarity proxy: 0.5 * char-trigram cosine + 0.5 * subtoken Jaccard.

    Both parts work on lowercase subtokens, so naming style does not matter.
    """
    a, b = _trigrams(orig), _trigrams(new)
    dot = sum(a[g] * b[g] for g in a)
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    cos = dot / (na * nb) if na and nb else 0.0
    sa, sb = set(subtokenize(orig)), set(subtokenize(new))
    jac = len(sa & sb) / len(sa | sb) if sa | sb else 0.0
    return 0.5 * cos + 0.5 * jac


def entropy_tokens(fn: FunctionUnit) -> list[str]:
    return [t.text.lower() for t in fn.code_tokens()]


BOS = "<s>"
UNK = "<unk>"


class TrigramModel:
    """Token 3-gram model with add-one smoothing."""

    def __init__(self):
        self.vocab: dict[str, int] | None = None

    @property
    def trained(self) -> bool:
        return self.vocab is not None

    def fit(self, sequences: Iterable[list[str]]) -> "TrigramModel":
        seqs = [list(s) for s in sequences]
        words = sorted({w for s in seqs for w in s} - {BOS, UNK})
        self.vocab = {UNK: 0, **{w: i + 1 for i, w in enumerate(words)}}
        self.bos = len(self.vocab)
        self.base = self.bos + 1
        tri, bi = [], []
        for s in seqs:
            ids = self._ids(s)
            tri.append(_accel.ngram_keys(ids, 3, self.base))
            bi.append(_accel.ngram_keys(ids[:-1], 2, self.base))
        self.tri = _accel.count_table(np.concatenate(tri) if tri else np.zeros(0, np.int64))
        self.bi = _accel.count_table(np.concatenate(bi) if bi else np.zeros(0, np.int64))
        return self

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def _ids(self, seq: list[str]) -> np.ndarray:
        return np.array([self.bos, self.bos] + [self.vocab.get(w, 0) for w in seq], dtype=np.int64)

    def token_bits(self, seq: list[str]) -> np.ndarray:
        if not self.trained:
            raise UntrainedModel("the 3-gram model has not been fitted")
        return _accel.trigram_log2prob(self._ids(seq), *self.tri, *self.bi, self.vocab_size, self.base)

    def entropy(self, seq: list[str]) -> float:
        bits = self.token_bits(seq)
        return float(bits.mean()) if len(bits) else 0.0


def ngram_entropy(code: FunctionUnit | list[str], lm: TrigramModel) -> float:
    """Mean -log2 P(token | two predecessors), in bits per token."""
    seq = entropy_tokens(code) if isinstance(code, FunctionUnit) else code
    return lm.entropy(seq)


@dataclass
class AttackRow:
    name: str
    bit_acc: float
    bits: int
    failures: int


@dataclass
class BenchReport:
    bit_acc: float
    bpt: float
    ast_pass_rate: float
    keyword_pass_rate: float
    entropy_original: float
    entropy_watermarked: float
    varsim_proxy: float
    functions: int
    functions_embedded: int
    bits: int
    failures: dict
    attacks: list[AttackRow] = field(default_factory=list)
    seed: int = 0
    mean_embed_seconds: float = 0.0
    mean_extract_seconds: float = 0.0

    def deterministic_dict(self) -> dict:
        """Everything except wall-clock timings, rounded for stable output."""
        d = asdict(self)
        d.pop("mean_embed_seconds")
        d.pop("mean_extract_seconds")
        return _round(d)

    def timings(self) -> dict:
        return {"mean_embed_seconds": self.mean_embed_seconds, "mean_extract_seconds": self.mean_extract_seconds}

    def to_json(self) -> str:
        return json.dumps(self.deterministic_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["attack", "bit_acc", "bits", "failures"])
        w.writerow(["none", f"{self.bit_acc:.6f}", self.bits, sum(self.failures.values())])
        for row in self.attacks:
            w.writerow([row.name, f"{row.bit_acc:.6f}", row.bits, row.failures])
        w.writerow([])
        w.writerow(["metric", "value"])
        for key in ("bpt", "ast_pass_rate", "keyword_pass_rate", "entropy_original", "entropy_watermarked", "varsim_proxy"):
            w.writerow([key if key != "varsim_proxy" else "varsim_proxy (proxy)", f"{getattr(self, key):.6f}"])
        return buf.getvalue()


def _round(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round(v) for v in obj]
    return obj


def _message_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def run_benchmark(
    functions: Sequence[FunctionUnit],
    bundle,
    attacks: Sequence = (),
    seed: int = 0,
    lm: TrigramModel | None = None,
) -> BenchReport:
    """Embed a random full-capacity message in every function, attack, extract.

    Per-sample errors are tallied by error code and never abort the run.
    """
    from varmark.attacks import apply_attack
    from varmark.pipeline import WatermarkMessage, embed, extract

    L = bundle.config.bits_per_var
    failures: Counter = Counter()
    ok_ast = ok_kw = 0
    embedded: list[tuple[int, str, object, list[int]]] = []
    bpts, sims, ent_o, ent_w = [], [], [], []
    embed_t, extract_t = [], []
    truth_all, got_all = [], []

    for i, fn in enumerate(functions):
        rng = _message_rng(seed, i)
        nvars = len(list_variables(fn))
        if nvars == 0:
            failures["no_variables"] += 1
            continue
        msg = WatermarkMessage(tuple(int(b) for b in rng.integers(0, 2, size=L * nvars)))
        try:
            t0 = time.perf_counter()
            wm, report = embed(fn.source, msg, bundle, language=fn.language, fn_id=fn.id)
            embed_t.append(time.perf_counter() - t0)
        except VarmarkError as e:
            failures[e.code] += 1
            continue
        ok_ast += report.checks.ast_ok
        ok_kw += report.checks.keyword_ok
        bpts.append(report.bpt)
        sims.extend(var_sim_proxy(v.original, v.new) for v in report.variables if v.new is not None)
        if lm is not None:
            ent_o.append(ngram_entropy(fn, lm))
            ent_w.append(ngram_entropy(parse_function(wm, fn.language, fn.id), lm))
        positions = report.embedded_positions()
        t0 = time.perf_counter()
        try:
            bits, _ = extract(wm, bundle, report.framing, language=fn.language)
        except VarmarkError as e:
            failures[e.code] += 1
            continue
        extract_t.append(time.perf_counter() - t0)
        truth_all.extend(_select(msg.bits, positions, L))
        got_all.extend(_select(bits, positions, L))
        embedded.append((i, wm, report, positions))

    rows = []
    for spec in attacks:
        truth, got, fails = [], [], 0
        for i, wm, report, positions in embedded:
            try:
                attacked = apply_attack(wm, spec, language=functions[i].language, index=i)
                bits, _ = extract(attacked, bundle, report.framing, language=functions[i].language)
            except VarmarkError:
                fails += 1
                continue
            truth.extend(_select(report.message_bits, positions, L))
            got.extend(_select(bits, positions, L))
        rows.append(AttackRow(spec.name, bit_accuracy(truth, got) if truth else 0.0, len(truth), fails))

    n = len(embedded)
    return BenchReport(
        bit_acc=bit_accuracy(truth_all, got_all) if truth_all else 0.0,
        bpt=float(np.mean(bpts)) if bpts else 0.0,
        ast_pass_rate=ok_ast / len(bpts) if bpts else 0.0,
        keyword_pass_rate=ok_kw / len(bpts) if bpts else 0.0,
        entropy_original=float(np.mean(ent_o)) if ent_o else 0.0,
        entropy_watermarked=float(np.mean(ent_w)) if ent_w else 0.0,
        varsim_proxy=float(np.mean(sims)) if sims else 0.0,
        functions=len(functions),
        functions_embedded=n,
        bits=len(truth_all),
        failures=dict(sorted(failures.items())),
        attacks=rows,
        seed=seed,
        mean_embed_seconds=float(np.mean(embed_t)) if embed_t else 0.0,
        mean_extract_seconds=float(np.mean(extract_t)) if extract_t else 0.0,
    )


def _select(bits: Sequence[int], positions: Sequence[int], L: int) -> list[int]:
    """Bits of the chunk positions that were actually embedded."""
    out = []
    for p in positions:
        out.extend(int(b) for b in bits[p * L : (p + 1) * L])
    return out
