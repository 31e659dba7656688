"""Message framing, watermark embedding and extraction for single functions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from varmark.errors import BeamExhausted, CapacityExceeded, EmptyContext, NoVariables, VarmarkError
from varmark.graph import build_context_graph
from varmark.lang.checks import CheckReport, check_pair
from varmark.lang.parser import parse_function
from varmark.lang.scope import analyze_scopes, check_new_name, rename_tokens
from varmark.lang.subtoken import render
from varmark.nn.batch import collate, encode_graph
from varmark.nn.gat import WatermarkChunk
from varmark.nn.model import ModelBundle

BEAM_WIDTH = 8


@dataclass(frozen=True)
class WatermarkMessage:
    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise ValueError("a message needs at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def from_hex(cls, text: str, nbits: int | None = None) -> "WatermarkMessage":
        """Big-endian hex; ``nbits`` keeps only the leading bits."""
        text = text.lower().removeprefix("0x")
        if not text:
            raise ValueError("empty hex message")
        bits = tuple(int(c) for c in bin(int(text, 16))[2:].zfill(4 * len(text)))
        if nbits is not None:
            if not 1 <= nbits <= len(bits):
                raise ValueError(f"--bits must be in [1, {len(bits)}]")
            bits = bits[:nbits]
        return cls(bits)

    def to_hex(self) -> str:
        """Hex of the bits, right-padded with zeros to a whole nibble."""
        padded = self.bits + (0,) * (-len(self.bits) % 4)
        return "".join(f"{int(''.join(map(str, padded[i:i + 4])), 2):x}" for i in range(0, len(padded), 4))

    @classmethod
    def from_string(cls, bits: str) -> "WatermarkMessage":
        return cls(tuple(int(c) for c in bits))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class FramingDescriptor:
    """Out-of-band facts the extractor needs: message length, L, skipped variables."""

    length: int
    bits_per_var: int
    skipped: tuple[int, ...] = ()

    @property
    def num_chunks(self) -> int:
        return math.ceil(self.length / self.bits_per_var)

    def to_json(self) -> dict:
        return {"length": self.length, "bits_per_var": self.bits_per_var, "skipped": list(self.skipped)}

    @classmethod
    def from_json(cls, obj: dict) -> "FramingDescriptor":
        return cls(int(obj["length"]), int(obj["bits_per_var"]), tuple(int(x) for x in obj.get("skipped", ())))


def frame_message(msg: WatermarkMessage, num_vars: int, L: int) -> tuple[list[WatermarkChunk], FramingDescriptor]:
    """Pad to a multiple of L, split, and repeat cyclically over ``num_vars``."""
    if num_vars < 1:
        raise NoVariables("no variables to carry the message")
    padded = msg.bits + (0,) * (-len(msg) % L)
    chunks = [WatermarkChunk(padded[i : i + L]) for i in range(0, len(padded), L)]
    if num_vars * L < len(msg):
        raise CapacityExceeded(f"{len(msg)} bits do not fit in {num_vars} variables x {L} bits")
    return [chunks[i % len(chunks)] for i in range(num_vars)], FramingDescriptor(len(msg), L)


@dataclass
class VariableRecord:
    ordinal: int
    original: str
    new: str | None  # None when skipped
    chunk: str | None
    chunk_position: int | None  # index into the framed chunk sequence
    beam_rank: int | None
    flags: tuple[str, ...] = ()


@dataclass
class EmbedReport:
    fn_id: str
    bits_per_var: int
    variables: list[VariableRecord]
    tokens: int
    checks: CheckReport
    framing: FramingDescriptor
    message_bits: tuple[int, ...] = field(repr=False, default=())

    @property
    def variables_used(self) -> int:
        return sum(v.new is not None for v in self.variables)

    @property
    def bits_embedded(self) -> int:
        return self.bits_per_var * self.variables_used

    @property
    def bpt(self) -> float:
        return self.bits_embedded / self.tokens

    def embedded_positions(self) -> list[int]:
        """Distinct chunk positions that made it into the code, in order."""
        return sorted({v.chunk_position for v in self.variables if v.chunk_position is not None})

    def to_json(self) -> dict:
        return {
            "fn_id": self.fn_id,
            "variables": [asdict(v) for v in self.variables],
            "variables_used": self.variables_used,
            "bits_embedded": self.bits_embedded,
            "tokens": self.tokens,
            "bpt": self.bpt,
            "checks": self.checks.to_dict(),
            "framing": self.framing.to_json(),
        }


@torch.no_grad()
def _heads(bundle: ModelBundle, graph) -> torch.Tensor:
    batch = collate([encode_graph(graph, bundle.vocabs)], bundle.vocabs)
    return bundle.model.embed_heads(batch)[0]


def candidate_names(bundle: ModelBundle, z: torch.Tensor, width: int = BEAM_WIDTH) -> list[str]:
    """Beam candidates rendered in camelCase; candidates with UNK are dropped."""
    names = bundle.vocabs.names
    out = []
    for cand in bundle.model.decoder.beam_search(z, width, bundle.config.max_name_len):
        if bundle.vocabs.unk_name_id in cand.ids:
            out.append(None)
            continue
        out.append(render([names.lookup(i) for i in cand.ids], "camel"))
    return out


def embed(
    source: str,
    msg: WatermarkMessage,
    bundle: ModelBundle,
    language: str = "java",
    fn_id: str = "",
    width: int = BEAM_WIDTH,
) -> tuple[str, EmbedReport]:
    """Rename variables in appearance order so that each carries one chunk."""
    fn = parse_function(source, language, fn_id)
    info = analyze_scopes(fn)
    nvars = len(info.bindings)
    if nvars == 0:
        raise NoVariables(f"function {fn_id!r} declares no variables")
    bundle.model.eval()
    L = bundle.config.bits_per_var
    chunks, framing = frame_message(msg, nvars, L)
    n_chunks = framing.num_chunks
    records: list[VariableRecord] = []
    skipped: list[int] = []
    assigned: set[str] = set()
    pending = 0  # next chunk position to place
    for ordinal in range(nvars):
        b = info.bindings[ordinal]
        chunk = chunks[pending % n_chunks]
        flags = b.flags
        try:
            graph = build_context_graph(fn, b)
        except EmptyContext:
            skipped.append(ordinal)
            records.append(VariableRecord(ordinal, b.name, None, None, None, None, flags + ("no_context",)))
            continue
        z = _heads(bundle, graph)[chunk.class_index]
        chosen = None
        for rank, name in enumerate(candidate_names(bundle, z, width)):
            if name is None or name in assigned:
                continue
            try:
                check_new_name(fn, b, name, info)
            except VarmarkError:
                continue
            chosen = (rank, name)
            break
        if chosen is None:
            skipped.append(ordinal)
            records.append(VariableRecord(ordinal, b.name, None, None, None, None, flags + ("beam_exhausted",)))
            continue
        rank, name = chosen
        if name != b.name:
            fn = rename_tokens(fn, {tok: name for tok in b.occurrences})
            info = analyze_scopes(fn)
        assigned.add(name)
        bits = "".join(map(str, chunk.bits))
        records.append(VariableRecord(ordinal, b.name, name, bits, pending % n_chunks, rank, flags))
        pending += 1
    framing = FramingDescriptor(framing.length, L, tuple(skipped))
    report = EmbedReport(
        fn_id=fn_id,
        bits_per_var=L,
        variables=records,
        tokens=len(fn.code_tokens()),
        checks=check_pair(source, fn.source, language),
        framing=framing,
        message_bits=msg.bits,
    )
    return fn.source, report


def embed_strict(source: str, msg: WatermarkMessage, bundle: ModelBundle, **kw) -> tuple[str, EmbedReport]:
    """Like ``embed`` but raises BeamExhausted if any message chunk was lost."""
    out, report = embed(source, msg, bundle, **kw)
    if len(report.embedded_positions()) < report.framing.num_chunks:
        raise BeamExhausted(f"only {len(report.embedded_positions())} of {report.framing.num_chunks} chunks placed")
    return out, report


@torch.no_grad()
def classify_variables(source: str, bundle: ModelBundle, language: str = "java", fn_id: str = ""):
    """Class probabilities for every variable, (V, 2^L), in appearance order."""
    bundle.model.eval()
    fn = parse_function(source, language, fn_id)
    bindings = analyze_scopes(fn).bindings
    if not bindings:
        raise NoVariables(f"function {fn_id!r} declares no variables")
    graphs, keep = [], []
    for b in bindings:
        try:
            graphs.append(encode_graph(build_context_graph(fn, b), bundle.vocabs))
            keep.append(b.ordinal)
        except EmptyContext:
            pass
    probs = np.full((len(bindings), bundle.config.num_classes), np.nan)
    if graphs:
        logits = bundle.model.extract_logits(collate(graphs, bundle.vocabs))
        probs[keep] = torch.softmax(logits, -1).numpy()
    return probs


def vote(probs: np.ndarray, framing: FramingDescriptor) -> tuple[list[int], list[float]]:
    """Confidence-weighted majority vote of per-variable predictions per chunk."""
    L, n = framing.bits_per_var, framing.num_chunks
    tally = np.zeros((n, 2**L))
    used = [i for i in range(len(probs)) if i not in set(framing.skipped)]
    for pos, ordinal in enumerate(used):
        row = probs[ordinal]
        if np.isnan(row).any():
            continue
        c = int(np.argmax(row))
        tally[pos % n, c] += row[c]
    bits: list[int] = []
    conf: list[float] = []
    for j in range(n):
        c = int(np.argmax(tally[j]))
        total = tally[j].sum()
        conf.append(float(tally[j, c] / total) if total > 0 else 0.0)
        bits.extend(WatermarkChunk.from_index(c, L).bits)
    return bits[: framing.length], conf


def extract(
    source: str, bundle: ModelBundle, framing: FramingDescriptor, language: str = "java", fn_id: str = ""
) -> tuple[list[int], list[float]]:
    return vote(classify_variables(source, bundle, language, fn_id), framing)
