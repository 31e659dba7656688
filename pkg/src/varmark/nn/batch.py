"""Index encoding of context graphs and batching into disjoint unions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from varmark.graph import VariableContextGraph
from varmark.vocab import MASK, Vocabs, token_pieces


@dataclass
class EncodedGraph:
    kind_ids: np.ndarray  # (N,)
    piece_ids: np.ndarray  # (P,) pieces of non-target leaves
    piece_node: np.ndarray  # (P,)
    src: np.ndarray
    dst: np.ndarray
    rel: np.ndarray
    target: int
    target_pieces: np.ndarray  # pieces of the target's own token text

    @property
    def num_nodes(self) -> int:
        return len(self.kind_ids)


def encode_graph(g: VariableContextGraph, vocabs: Vocabs) -> EncodedGraph:
    kind_ids = np.fromiter((vocabs.kinds[n.kind] for n in g.nodes), dtype=np.int64, count=g.num_nodes)
    pieces: list[int] = []
    owners: list[int] = []
    target_pieces: list[int] = []
    for n in g.nodes:
        if not n.is_leaf:
            continue
        ids = [vocabs.pieces[p] for p in token_pieces(n.text, n.kind)]
        if n.is_target:
            target_pieces = ids
        else:
            pieces.extend(ids)
            owners.extend([n.id] * len(ids))
    src, dst, rel = g.edge_arrays()
    return EncodedGraph(
        kind_ids=kind_ids,
        piece_ids=np.asarray(pieces, dtype=np.int64),
        piece_node=np.asarray(owners, dtype=np.int64),
        src=src,
        dst=dst,
        rel=rel,
        target=g.target,
        target_pieces=np.asarray(target_pieces, dtype=np.int64),
    )


@dataclass
class GraphBatch:
    kind_ids: torch.Tensor
    piece_ids: torch.Tensor
    piece_node: torch.Tensor
    src: torch.Tensor
    dst: torch.Tensor
    rel: torch.Tensor
    targets: torch.Tensor  # (B,) node index of each graph's target
    target_piece_ids: torch.Tensor  # (Q,)
    target_piece_graph: torch.Tensor  # (Q,) batch position owning each target piece
    mask_id: int

    @property
    def num_nodes(self) -> int:
        return int(self.kind_ids.shape[0])

    @property
    def batch_size(self) -> int:
        return int(self.targets.shape[0])


def collate(graphs: list[EncodedGraph], vocabs: Vocabs) -> GraphBatch:
    offsets = np.cumsum([0] + [g.num_nodes for g in graphs[:-1]])
    cat = np.concatenate

    def t(a):
        return torch.from_numpy(np.ascontiguousarray(a, dtype=np.int64))

    return GraphBatch(
        kind_ids=t(cat([g.kind_ids for g in graphs])),
        piece_ids=t(cat([g.piece_ids for g in graphs])),
        piece_node=t(cat([g.piece_node + o for g, o in zip(graphs, offsets)])),
        src=t(cat([g.src + o for g, o in zip(graphs, offsets)])),
        dst=t(cat([g.dst + o for g, o in zip(graphs, offsets)])),
        rel=t(cat([g.rel for g in graphs])),
        targets=t(np.asarray([g.target + o for g, o in zip(graphs, offsets)])),
        target_piece_ids=t(cat([g.target_pieces for g in graphs])),
        target_piece_graph=t(cat([np.full(len(g.target_pieces), b) for b, g in enumerate(graphs)])),
        mask_id=vocabs.pieces[MASK],
    )
