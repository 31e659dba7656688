"""Neural components: graph attention encoder, name decoder, classifier."""

from varmark.nn.batch import EncodedGraph, GraphBatch, collate, encode_graph
from varmark.nn.classifier import WatermarkClassifier
from varmark.nn.decoder import NameDecoder
from varmark.nn.gat import (
    GraphEncoder,
    NodeEmbedder,
    RelGATLayer,
    WatermarkChunk,
    featurize,
    gat_forward,
    select_head,
    select_heads,
)
from varmark.nn.gumbel import gumbel_softmax
from varmark.nn.model import ModelBundle, ModelConfig, WatermarkModel

__all__ = [
    "EncodedGraph",
    "GraphBatch",
    "GraphEncoder",
    "ModelBundle",
    "ModelConfig",
    "NameDecoder",
    "NodeEmbedder",
    "RelGATLayer",
    "WatermarkChunk",
    "WatermarkClassifier",
    "WatermarkModel",
    "collate",
    "encode_graph",
    "featurize",
    "gat_forward",
    "gumbel_softmax",
    "select_head",
    "select_heads",
]
