"""Node embedding, relational multi-head graph attention, and head selection."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from varmark.errors import DimensionMismatch, IndexOutOfRange, IsolatedNode
from varmark.graph import NUM_RELATIONS, VariableContextGraph
from varmark.nn.batch import GraphBatch


@dataclass(frozen=True)
class WatermarkChunk:
    bits: tuple[int, ...]

    @property
    def class_index(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | int(b)
        return value

    @classmethod
    def from_index(cls, index: int, length: int) -> "WatermarkChunk":
        if not 0 <= index < 2**length:
            raise IndexOutOfRange(f"class {index} does not fit in {length} bits")
        return cls(tuple((index >> (length - 1 - i)) & 1 for i in range(length)))


class NodeEmbedder(nn.Module):
    """kind embedding + mean of token-subtoken embeddings (leaves only)."""

    def __init__(self, num_kinds: int, num_pieces: int, dim: int):
        super().__init__()
        self.dim = dim
        self.kinds = nn.Embedding(num_kinds, dim)
        self.pieces = nn.Embedding(num_pieces, dim)
        nn.init.normal_(self.kinds.weight, std=dim**-0.5)
        nn.init.normal_(self.pieces.weight, std=dim**-0.5)

    def forward(
        self,
        batch: GraphBatch,
        target: str = "real",
        target_vectors: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """``target`` is "mask", "real" or "override" (uses ``target_vectors``)."""
        n = batch.num_nodes
        x = self.kinds(batch.kind_ids)
        token = torch.zeros(n, self.dim, dtype=x.dtype).index_add(0, batch.piece_node, self.pieces(batch.piece_ids))
        counts = torch.bincount(batch.piece_node, minlength=n).clamp_min(1).to(x.dtype)
        token = token / counts[:, None]
        bsz = batch.batch_size
        if target == "mask":
            tvec = self.pieces.weight[batch.mask_id].expand(bsz, self.dim)
        elif target == "real":
            tsum = torch.zeros(bsz, self.dim, dtype=x.dtype).index_add(
                0, batch.target_piece_graph, self.pieces(batch.target_piece_ids)
            )
            tcount = torch.bincount(batch.target_piece_graph, minlength=bsz).clamp_min(1).to(x.dtype)
            tvec = tsum / tcount[:, None]
        elif target == "override":
            if target_vectors is None or target_vectors.shape != (bsz, self.dim):
                raise DimensionMismatch("override vectors must be (batch, dim)")
            tvec = target_vectors
        else:
            raise ValueError(f"unknown target mode {target!r}")
        token = token.index_copy(0, batch.targets, tvec.to(x.dtype))
        return x + token


def featurize(
    g: VariableContextGraph, vocabs, tables: NodeEmbedder, mask_target: bool = True
) -> torch.Tensor:
    """Node feature matrix (N, F) for one graph.

    Leaves get kind + mean subtoken embedding, inner nodes their kind embedding.
    With ``mask_target`` the target's own name is replaced by MASK.
    """
    from varmark.nn.batch import collate, encode_graph

    enc = encode_graph(g, vocabs)
    if len(vocabs.kinds) != tables.kinds.num_embeddings or len(vocabs.pieces) != tables.pieces.num_embeddings:
        raise DimensionMismatch("embedding tables do not cover the vocabulary")
    return tables(collate([enc], vocabs), target="mask" if mask_target else "real")


def segment_softmax(logits: torch.Tensor, index: torch.Tensor, num_segments: int) -> torch.Tensor:
    """Softmax of ``logits`` rows grouped by ``index`` (E, K) -> (E, K)."""
    k = logits.shape[1]
    peak = torch.full((num_segments, k), float("-inf"), dtype=logits.dtype)
    peak = peak.scatter_reduce(0, index[:, None].expand(-1, k), logits.detach(), "amax", include_self=True)
    ex = torch.exp(logits - peak[index])
    denom = torch.zeros(num_segments, k, dtype=logits.dtype).index_add(0, index, ex)
    return ex / denom[index]


class RelGATLayer(nn.Module):
    """Multi-head additive graph attention with a per-relation logit bias.

    For head k and node i: h'_i = act(sum_j a_ij W_k h_j), where a_ij is the
    softmax over incoming edges of leaky_relu(s_k.W_k h_j + d_k.W_k h_i) + b[rel, k].
    Head outputs are concatenated.
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        heads: int,
        num_relations: int = NUM_RELATIONS,
        dropout: float = 0.1,
        negative_slope: float = 0.2,
        activation: str | None = "relu",
    ):
        super().__init__()
        self.in_dim, self.out_dim, self.heads = in_dim, out_dim, heads
        self.lin = nn.Linear(in_dim, heads * out_dim, bias=False)
        self.att_src = nn.Parameter(torch.empty(heads, out_dim))
        self.att_dst = nn.Parameter(torch.empty(heads, out_dim))
        self.rel_bias = nn.Parameter(torch.zeros(num_relations, heads))
        self.dropout = dropout
        self.negative_slope = negative_slope
        self.activation = activation
        nn.init.xavier_uniform_(self.lin.weight)
        nn.init.xavier_uniform_(self.att_src)
        nn.init.xavier_uniform_(self.att_dst)

    def forward(
        self,
        x: torch.Tensor,
        src: torch.Tensor,
        dst: torch.Tensor,
        rel: torch.Tensor,
        dst_nodes: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """Outputs for all nodes, or only for ``dst_nodes`` (rows in that order)."""
        if x.shape[-1] != self.in_dim:
            raise DimensionMismatch(f"layer expects {self.in_dim} input features, got {x.shape[-1]}")
        n = x.shape[0]
        k, fo = self.heads, self.out_dim
        if dst_nodes is not None:
            keep = torch.isin(dst, dst_nodes)
            src, dst, rel = src[keep], dst[keep], rel[keep]
            z_src = self.lin(x[src]).view(-1, k, fo)
            z_dst = self.lin(x[dst]).view(-1, k, fo)
            checked = dst_nodes
        else:
            z = self.lin(x).view(n, k, fo)
            z_src, z_dst = z[src], z[dst]
            checked = None
        indeg = torch.bincount(dst, minlength=n)
        bad = (indeg == 0) if checked is None else (indeg[checked] == 0)
        if bool(bad.any()):
            raise IsolatedNode("node without incoming edges")

        logits = (z_src * self.att_src).sum(-1) + (z_dst * self.att_dst).sum(-1)
        logits = F.leaky_relu(logits, self.negative_slope) + self.rel_bias[rel]
        alpha = segment_softmax(logits, dst, n)
        alpha = F.dropout(alpha, self.dropout, self.training)
        out = torch.zeros(n, k, fo, dtype=x.dtype).index_add(0, dst, alpha[..., None] * z_src)
        if self.activation == "relu":
            out = torch.relu(out)
        if dst_nodes is not None:
            out = out[dst_nodes]
        return out.reshape(out.shape[0], k * fo)


class GraphEncoder(nn.Module):
    """Two attention layers; the second is evaluated at target nodes only."""

    def __init__(self, in_dim: int, head_dim: int, heads: int, dropout: float = 0.1):
        super().__init__()
        self.heads, self.head_dim = heads, head_dim
        self.layer1 = RelGATLayer(in_dim, head_dim, heads, dropout=dropout)
        self.layer2 = RelGATLayer(heads * head_dim, head_dim, heads, dropout=dropout)

    def forward(self, x: torch.Tensor, batch: GraphBatch) -> torch.Tensor:
        h = self.layer1(x, batch.src, batch.dst, batch.rel)
        return self.layer2(h, batch.src, batch.dst, batch.rel, dst_nodes=batch.targets)

    def all_nodes(self, x: torch.Tensor, batch: GraphBatch) -> torch.Tensor:
        h = self.layer1(x, batch.src, batch.dst, batch.rel)
        return self.layer2(h, batch.src, batch.dst, batch.rel)


def gat_forward(x: torch.Tensor, g: VariableContextGraph, layer: RelGATLayer) -> torch.Tensor:
    """One attention layer over a single graph: (N, F) -> (N, K * F')."""
    src, dst, rel = (torch.from_numpy(a) for a in g.edge_arrays())
    return layer(x, src, dst, rel)


def select_head(h_concat: torch.Tensor, chunk: WatermarkChunk | int, head_dim: int) -> torch.Tensor:
    """Block ``[c * head_dim, (c + 1) * head_dim)`` of the last axis."""
    c = chunk.class_index if isinstance(chunk, WatermarkChunk) else int(chunk)
    heads = h_concat.shape[-1] // head_dim
    if not 0 <= c < heads:
        raise IndexOutOfRange(f"head {c} outside [0, {heads})")
    return h_concat[..., c * head_dim : (c + 1) * head_dim]


def select_heads(h_concat: torch.Tensor, chunks: torch.Tensor, head_dim: int) -> torch.Tensor:
    """Batched selection: row b takes block ``chunks[b]``."""
    bsz = h_concat.shape[0]
    blocks = h_concat.view(bsz, -1, head_dim)
    return blocks[torch.arange(bsz), chunks]
