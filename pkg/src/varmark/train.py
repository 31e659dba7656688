"""End-to-end training of the embedding and extraction networks."""

from __future__ import annotations

import configparser
import copy
import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from varmark.errors import Divergence, EmptyContext, NoStatementContext
from varmark.evalkit import var_sim_proxy
from varmark.graph import build_context_graph
from varmark.lang.parser import FunctionUnit
from varmark.lang.scope import list_variables
from varmark.lang.subtoken import render
from varmark.nn.batch import EncodedGraph, collate, encode_graph
from varmark.nn.decoder import END
from varmark.nn.model import ModelBundle, ModelConfig
from varmark.teacher import DEFAULT_K, CorpusTeacher, LabelStore
from varmark.vocab import Vocabs, build_vocabs

log = logging.getLogger(__name__)

METRIC_FIELDS = ("epoch", "L_wa", "L_na", "L_t", "val_bitacc", "val_varsim_proxy")


@dataclass
class TrainConfig:
    alpha: float = 0.6
    lr: float = 0.00025
    batch_size: int = 32
    epochs: int = 100
    tau: float = 0.5
    bits_per_var: int = 2
    seed: int = 0
    feature_dim: int = 128
    head_dim: int = 128
    hidden: int = 128
    max_name_len: int = 5
    dropout: float = 0.1
    patience: int = 10
    clip: float = 5.0
    top_k: int = DEFAULT_K

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.bits_per_var < 1:
            raise ValueError("bits_per_var must be >= 1")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            bits_per_var=self.bits_per_var,
            feature_dim=self.feature_dim,
            head_dim=self.head_dim,
            decoder_hidden=self.hidden,
            classifier_hidden=self.hidden,
            max_name_len=self.max_name_len,
            dropout=self.dropout,
        )

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "TrainConfig":
        """Read a ``[train]`` section of key = value pairs."""
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise FileNotFoundError(path)
        section = parser["train"] if parser.has_section("train") else {}
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in section.items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = float(raw) if types[key] in ("float", float) else int(raw)
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


def watermark_loss(pred: torch.Tensor, true_chunk: torch.Tensor | int) -> torch.Tensor:
    """-log p_c for probability vectors ``pred`` (..., C); averaged over a batch."""
    c = torch.as_tensor(true_chunk)
    p = pred.gather(-1, c.reshape(*pred.shape[:-1], 1)).squeeze(-1)
    return -torch.log(p).mean()


def watermark_loss_logits(logits: torch.Tensor, chunks: torch.Tensor) -> torch.Tensor:
    return F.cross_entropy(logits, chunks)


def naturalness_loss(student_logp: torch.Tensor, label: torch.Tensor) -> torch.Tensor:
    """-sum_t sum_w P_phi(w) log P_theta(w); a leading batch axis is averaged.

    Zero-probability label entries contribute nothing even where the student
    assigns -inf.
    """
    terms = torch.where(label > 0, label * student_logp, torch.zeros((), dtype=student_logp.dtype))
    total = -terms.sum(dim=(-2, -1))
    return total.mean() if total.dim() else total


def total_loss(l_wa: torch.Tensor, l_na: torch.Tensor, alpha: float) -> torch.Tensor:
    return alpha * l_wa + (1.0 - alpha) * l_na


@dataclass
class TrainSample:
    graph: EncodedGraph
    label: np.ndarray  # (max_len + 1, |names|)
    name: str
    fn_id: str
    ordinal: int


def prepare_samples(
    functions: Iterable[FunctionUnit],
    vocabs: Vocabs,
    labels: LabelStore | CorpusTeacher | None,
    cfg: TrainConfig,
) -> list[TrainSample]:
    if isinstance(labels, CorpusTeacher):
        labels = LabelStore(fallback=labels)
    steps = cfg.max_name_len + 1
    index = vocabs.names.index
    out = []
    for fn in functions:
        for b in list_variables(fn):
            try:
                g = build_context_graph(fn, b)
            except EmptyContext:
                continue
            if labels is None:
                dense = np.zeros((steps, len(vocabs.names)))
            else:
                try:
                    sl = labels.get(fn, b, cfg.top_k, cfg.max_name_len)
                except NoStatementContext:
                    continue
                dense = sl.dense(index, len(vocabs.names), steps)
            out.append(TrainSample(encode_graph(g, vocabs), dense.astype(np.float32), b.name, fn.id, b.ordinal))
    return out


def _valid_mask(samples: torch.Tensor) -> torch.Tensor:
    """1 for decode positions strictly before the first END."""
    is_end = samples.detach()[..., END] > 0.5
    return (torch.cumsum(is_end.to(torch.int64), dim=1) == 0).to(samples.dtype)


def _chunk_bits(chunks: np.ndarray, bits: int) -> np.ndarray:
    return (chunks[:, None] >> np.arange(bits - 1, -1, -1)) & 1


class Trainer:
    """One training run; kept as an object so tests can step it."""

    def __init__(self, bundle: ModelBundle, cfg: TrainConfig):
        self.bundle = bundle
        self.cfg = cfg
        self.model = bundle.model
        self.opt = torch.optim.Adam(self.model.parameters(), lr=cfg.lr)
        self.gen = torch.Generator().manual_seed(cfg.seed)
        self.rng = np.random.default_rng(cfg.seed)

    def forward(self, batch, chunks: torch.Tensor, label: torch.Tensor | None):
        m, cfg = self.model, self.cfg
        heads = m.embed_heads(batch)
        z = heads[torch.arange(batch.batch_size), chunks]
        y, logp = m.decoder.forward_gumbel(z, cfg.max_name_len + 1, cfg.tau, self.gen)
        vec = m.name_vectors(y, _valid_mask(y))
        logits = m.extract_logits(batch, target_vectors=vec)
        l_wa = watermark_loss_logits(logits, chunks)
        l_na = naturalness_loss(logp, label) if label is not None else torch.zeros(())
        return l_wa, l_na, total_loss(l_wa, l_na, cfg.alpha)

    def step(self, samples: Sequence[TrainSample], chunks: np.ndarray) -> tuple[float, float, float]:
        self.model.train()
        batch = collate([s.graph for s in samples], self.bundle.vocabs)
        label = torch.from_numpy(np.stack([s.label for s in samples]))
        l_wa, l_na, l_t = self.forward(batch, torch.from_numpy(chunks), label)
        if not torch.isfinite(l_t):
            raise Divergence(f"non-finite loss: L_wa={l_wa.item()} L_na={l_na.item()}")
        self.opt.zero_grad()
        l_t.backward()
        torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.cfg.clip)
        self.opt.step()
        return float(l_wa.detach()), float(l_na.detach()), float(l_t.detach())

    def epoch(self, samples: Sequence[TrainSample]) -> tuple[float, float, float]:
        k = self.bundle.config.num_classes
        order = self.rng.permutation(len(samples))
        chunks = self.rng.integers(0, k, size=len(samples))
        sums = np.zeros(3)
        for lo in range(0, len(samples), self.cfg.batch_size):
            idx = order[lo : lo + self.cfg.batch_size]
            try:
                sums += np.array(self.step([samples[i] for i in idx], chunks[lo : lo + len(idx)])) * len(idx)
            except Divergence as e:
                raise Divergence(f"{e} (batch starting at {lo})") from None
        return tuple(sums / max(len(samples), 1))


@torch.no_grad()
def validate(bundle: ModelBundle, samples: Sequence[TrainSample], seed: int, batch_size: int = 64) -> tuple[float, float]:
    """Greedy-decode proxy of embed/extract on graphs: (bit accuracy, VarSim proxy)."""
    if not samples:
        return 0.0, 0.0
    m = bundle.model
    m.eval()
    cfg = bundle.config
    rng = np.random.default_rng(seed)
    chunks = rng.integers(0, cfg.num_classes, size=len(samples))
    correct, sims = 0, []
    names = bundle.vocabs.names
    for lo in range(0, len(samples), batch_size):
        part = samples[lo : lo + batch_size]
        c = torch.from_numpy(chunks[lo : lo + len(part)])
        batch = collate([s.graph for s in part], bundle.vocabs)
        z = m.embed_heads(batch)[torch.arange(len(part)), c]
        ids, _ = m.decoder.forward_greedy(z, cfg.max_name_len + 1)
        onehot = F.one_hot(ids, len(names)).to(z.dtype)
        pred = m.extract_logits(batch, target_vectors=m.name_vectors(onehot, _valid_mask(onehot))).argmax(-1)
        got = _chunk_bits(pred.numpy(), cfg.bits_per_var)
        want = _chunk_bits(c.numpy(), cfg.bits_per_var)
        correct += int((got == want).sum())
        for s, row in zip(part, ids.tolist()):
            subs = [names.lookup(i) for i in row[: row.index(END)]] if END in row else [names.lookup(i) for i in row]
            new = render(subs) if subs else ""
            sims.append(var_sim_proxy(s.name, new) if new else 0.0)
    return correct / (len(samples) * cfg.bits_per_var), float(np.mean(sims))


def format_metrics(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_FIELDS)
    for r in rows:
        w.writerow([r["epoch"]] + [f"{r[k]:.6f}" for k in METRIC_FIELDS[1:]])
    return buf.getvalue()


@dataclass
class TrainResult:
    bundle: ModelBundle
    metrics: list[dict]
    best_epoch: int
    seconds: float

    def metrics_csv(self) -> str:
        return format_metrics(self.metrics)


def set_deterministic(seed: int) -> None:
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)


def train(
    train_fns: Sequence[FunctionUnit],
    valid_fns: Sequence[FunctionUnit],
    teacher: LabelStore | CorpusTeacher | None,
    cfg: TrainConfig,
    metrics_path: str | Path | None = None,
    vocabs: Vocabs | None = None,
    max_seconds: float | None = None,
) -> TrainResult:
    """Train both networks; the returned bundle holds the best-validation weights."""
    set_deterministic(cfg.seed)
    start = time.perf_counter()
    vocabs = vocabs or build_vocabs(train_fns)
    bundle = ModelBundle.create(cfg.model_config(), vocabs, seed=cfg.seed, meta={"train": asdict(cfg)})
    train_samples = prepare_samples(train_fns, vocabs, teacher, cfg)
    valid_samples = prepare_samples(valid_fns, vocabs, None, cfg)
    if not train_samples:
        raise ValueError("no trainable variables in the training corpus")
    trainer = Trainer(bundle, cfg)
    rows: list[dict] = []
    best, best_epoch, best_state, stale = -1.0, 0, None, 0
    for epoch in range(1, cfg.epochs + 1):
        l_wa, l_na, l_t = trainer.epoch(train_samples)
        acc, sim = validate(bundle, valid_samples, cfg.seed + 1)
        rows.append({"epoch": epoch, "L_wa": l_wa, "L_na": l_na, "L_t": l_t, "val_bitacc": acc, "val_varsim_proxy": sim})
        log.info("epoch %d L_wa=%.4f L_na=%.4f val_bitacc=%.4f varsim=%.4f", epoch, l_wa, l_na, acc, sim)
        if metrics_path is not None:
            Path(metrics_path).write_text(format_metrics(rows))
        if acc > best:
            best, best_epoch, stale = acc, epoch, 0
            best_state = copy.deepcopy(bundle.model.state_dict())
        else:
            stale += 1
            if stale >= cfg.patience:
                break
        if max_seconds is not None and time.perf_counter() - start > max_seconds:
            log.warning("stopping after %d epochs: time budget reached", epoch)
            break
    if best_state is not None:
        bundle.model.load_state_dict(best_state)
    bundle.model.eval()
    bundle.meta["best_epoch"] = best_epoch
    bundle.meta["best_val_bitacc"] = round(best, 6)
    return TrainResult(bundle, rows, best_epoch, time.perf_counter() - start)


__all__ = [
    "METRIC_FIELDS",
    "TrainConfig",
    "TrainResult",
    "TrainSample",
    "Trainer",
    "format_metrics",
    "naturalness_loss",
    "prepare_samples",
    "total_loss",
    "train",
    "validate",
    "watermark_loss",
]
