"""The embedding and extraction networks and their checkpoint container."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from varmark.errors import SchemaError
from varmark.nn.batch import GraphBatch
from varmark.nn.classifier import WatermarkClassifier
from varmark.nn.decoder import NameDecoder
from varmark.nn.gat import GraphEncoder, NodeEmbedder
from varmark.vocab import Vocabs

CHECKPOINT_FORMAT = "varmark-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class ModelConfig:
    bits_per_var: int = 2
    feature_dim: int = 128
    head_dim: int = 128
    decoder_hidden: int = 128
    classifier_hidden: int = 128
    max_name_len: int = 5
    dropout: float = 0.1

    @property
    def heads(self) -> int:
        return 2**self.bits_per_var

    @property
    def num_classes(self) -> int:
        return 2**self.bits_per_var


class WatermarkModel(nn.Module):
    def __init__(self, cfg: ModelConfig, vocabs: Vocabs):
        super().__init__()
        self.cfg = cfg
        k, fh = cfg.heads, cfg.head_dim
        self.emb_nodes = NodeEmbedder(len(vocabs.kinds), len(vocabs.pieces), cfg.feature_dim)
        self.emb_encoder = GraphEncoder(cfg.feature_dim, fh, k, cfg.dropout)
        self.decoder = NameDecoder(fh, cfg.decoder_hidden, cfg.feature_dim, len(vocabs.names))
        self.ext_nodes = NodeEmbedder(len(vocabs.kinds), len(vocabs.pieces), cfg.feature_dim)
        self.ext_encoder = GraphEncoder(cfg.feature_dim, fh, k, cfg.dropout)
        self.classifier = WatermarkClassifier(k * fh, cfg.classifier_hidden, cfg.num_classes)
        self.register_buffer(
            "name_to_piece", torch.tensor(vocabs.name_to_piece(), dtype=torch.int64), persistent=False
        )

    def embed_heads(self, batch: GraphBatch) -> torch.Tensor:
        """Target representations of the embedding encoder, (B, K, head_dim)."""
        x = self.emb_nodes(batch, target="mask")
        h = self.emb_encoder(x, batch)
        return h.view(batch.batch_size, self.cfg.heads, self.cfg.head_dim)

    def name_vectors(self, samples: torch.Tensor, valid: torch.Tensor) -> torch.Tensor:
        """Mean extraction-side subtoken embedding of decoded names.

        samples: (B, T, V) one-hot (soft-gradient) decodes; valid: (B, T) 0/1.
        """
        table = self.ext_nodes.pieces.weight[self.name_to_piece]  # (V, F)
        vec = samples @ table  # (B, T, F)
        w = valid.to(vec.dtype)
        return (vec * w[..., None]).sum(1) / w.sum(1).clamp_min(1.0)[:, None]

    def extract_logits(self, batch: GraphBatch, target_vectors: torch.Tensor | None = None) -> torch.Tensor:
        if target_vectors is None:
            x = self.ext_nodes(batch, target="real")
        else:
            x = self.ext_nodes(batch, target="override", target_vectors=target_vectors)
        return self.classifier(self.ext_encoder(x, batch))


@dataclass
class ModelBundle:
    """All learned parameters plus what is needed to interpret them."""

    config: ModelConfig
    vocabs: Vocabs
    model: WatermarkModel
    meta: dict = field(default_factory=dict)  # training config echo, seed, ...

    @classmethod
    def create(cls, config: ModelConfig, vocabs: Vocabs, seed: int = 0, meta: dict | None = None) -> "ModelBundle":
        torch.manual_seed(seed)
        model = WatermarkModel(config, vocabs)
        model.eval()
        return cls(config, vocabs, model, dict(meta or {}))

    def save(self, path: str | Path) -> None:
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "heads": self.config.heads,
            "vocab_hash": self.vocabs.digest(),
            "vocabs": self.vocabs.to_json(),
            "meta": self.meta,
        }
        arrays = {
            f"param/{name}": t.detach().cpu().numpy().astype(np.float32)
            for name, t in self.model.state_dict().items()
        }
        arrays["__header__"] = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        with np.load(path, allow_pickle=False) as npz:
            if "__header__" not in npz:
                raise SchemaError(f"{path}: not a model checkpoint")
            header = json.loads(npz["__header__"].tobytes().decode())
            if header.get("format") != CHECKPOINT_FORMAT or header.get("version") != CHECKPOINT_VERSION:
                raise SchemaError(f"{path}: unsupported checkpoint format/version")
            params = {k[len("param/") :]: torch.from_numpy(npz[k].copy()) for k in npz.files if k.startswith("param/")}
        vocabs = Vocabs.from_json(header["vocabs"])
        if vocabs.digest() != header["vocab_hash"]:
            raise SchemaError(f"{path}: vocabulary hash mismatch")
        config = ModelConfig(**header["config"])
        model = WatermarkModel(config, vocabs)
        model.load_state_dict(params)
        model.eval()
        return cls(config, vocabs, model, header.get("meta", {}))
