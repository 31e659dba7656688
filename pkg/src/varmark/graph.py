"""Per-variable context graphs built from the statement subtrees around a variable."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from varmark.errors import EmptyContext
from varmark.lang import java
from varmark.lang.parser import FunctionUnit
from varmark.lang.scope import VariableBinding

MAX_NODES = 512


class Rel(IntEnum):
    AST = 0
    NEXT_TOKEN = 1
    SELF_LOOP = 2
    AST_REV = 3
    NEXT_TOKEN_REV = 4
    SELF_LOOP_REV = 5

    @property
    def reverse(self) -> "Rel":
        return Rel((self + 3) % 6)


NUM_RELATIONS = len(Rel)


@dataclass(frozen=True, slots=True)
class GraphNode:
    id: int
    kind: str
    text: str  # token text for leaves, "" for inner nodes
    is_target: bool
    is_leaf: bool


@dataclass(frozen=True)
class VariableContextGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int, int], ...]  # (src, dst, Rel), sorted
    target: int
    variable: str = ""
    fn_id: str = ""
    ordinal: int = -1

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, empty
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    def to_json(self) -> dict:
        return {
            "fn_id": self.fn_id,
            "variable": self.variable,
            "ordinal": self.ordinal,
            "target": self.target,
            "nodes": [
                {"id": n.id, "kind": n.kind, "text": n.text, "target": n.is_target, "leaf": n.is_leaf}
                for n in self.nodes
            ],
            "edges": [[s, d, Rel(r).name] for s, d, r in self.edges],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VariableContextGraph":
        nodes = tuple(
            GraphNode(n["id"], n["kind"], n["text"], bool(n["target"]), bool(n["leaf"])) for n in obj["nodes"]
        )
        edges = tuple((int(s), int(d), int(Rel[r])) for s, d, r in obj["edges"])
        return cls(nodes, edges, int(obj["target"]), obj.get("variable", ""), obj.get("fn_id", ""), obj.get("ordinal", -1))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def enclosing_statement(fn: FunctionUnit, node_index: int) -> int | None:
    for anc in fn.ancestors(node_index):
        if anc.kind in java.STATEMENT_KINDS:
            return anc.index
    return None


def _subtree(fn: FunctionUnit, root: int, keep: set[int]) -> list[int]:
    """Pre-order nodes of a statement, not descending into nested statements or blocks."""
    out = []
    stack = [root]
    while stack:
        idx = stack.pop()
        out.append(idx)
        for child in reversed(fn.nodes[idx].children):
            kind = fn.nodes[child].kind
            if kind in java.COMMENT_KINDS:
                continue
            if kind in java.SUBTREE_STOP_KINDS and child not in keep:
                continue
            stack.append(child)
    return out


def build_context_graph(
    fn: FunctionUnit, b: VariableBinding, max_nodes: int = MAX_NODES
) -> VariableContextGraph:
    occ_leaves = [fn.leaf(t).index for t in b.occurrences]
    occ_set = set(occ_leaves)

    stmt_of: dict[int, list[int]] = {}
    for leaf in occ_leaves:
        s = enclosing_statement(fn, leaf)
        if s is not None:
            stmt_of.setdefault(s, []).append(leaf)
    if not stmt_of:
        raise EmptyContext(f"variable {b.name!r} has no enclosing statement")

    subtrees: dict[int, list[int]] = {}
    for s, leaves in stmt_of.items():
        keep: set[int] = set()
        for leaf in leaves:
            for anc in fn.ancestors(leaf):
                if anc.index == s:
                    break
                keep.add(anc.index)
        subtrees[s] = _subtree(fn, s, keep)

    statements = sorted(stmt_of, key=lambda s: fn.nodes[s].start)
    first_tok = b.occurrences[0]

    def size(stmts):
        merged = set()
        for s in stmts:
            merged.update(subtrees[s])
        return len(merged - occ_set) + 1

    if size(statements) > max_nodes:
        # drop statements farthest (in tokens) from the first occurrence
        def distance(s):
            toks = [fn.nodes[i].token for i in subtrees[s] if fn.nodes[i].token >= 0]
            return min(abs(t - first_tok) for t in toks)

        ranked = sorted(statements, key=lambda s: (distance(s), fn.nodes[s].start))
        kept = ranked[:1]
        for s in ranked[1:]:
            if size(kept + [s]) <= max_nodes:
                kept.append(s)
        statements = sorted(kept, key=lambda s: fn.nodes[s].start)

    included: set[int] = set()
    for s in statements:
        included.update(subtrees[s])
    target_leaves = sorted(included & occ_set, key=lambda i: fn.nodes[i].start)
    rep = target_leaves[0]

    def key(i):
        n = fn.nodes[i]
        return (n.start, -n.end, n.depth, n.kind)

    members = sorted((included - occ_set) | {rep}, key=key)
    gid = {tree_idx: k for k, tree_idx in enumerate(members)}
    for leaf in target_leaves:
        gid[leaf] = gid[rep]
    target = gid[rep]

    nodes = []
    for k, tree_idx in enumerate(members):
        n = fn.nodes[tree_idx]
        text = fn.tokens[n.token].text if n.is_leaf and n.token >= 0 else ""
        nodes.append(GraphNode(k, n.kind, text, k == target, n.is_leaf))

    edges: set[tuple[int, int, int]] = set()
    roots = set(statements)
    for s in statements:
        leaves = []
        for idx in subtrees[s]:
            n = fn.nodes[idx]
            if idx not in roots and n.parent in included:
                edges.add((gid[n.parent], gid[idx], Rel.AST))
            if n.is_leaf:
                leaves.append(idx)
        leaves.sort(key=lambda i: fn.nodes[i].start)
        for a, c in zip(leaves, leaves[1:]):
            if gid[a] != gid[c]:
                edges.add((gid[a], gid[c], Rel.NEXT_TOKEN))
    edges.add((target, target, Rel.SELF_LOOP))
    edges |= {(d, s, Rel(r).reverse) for s, d, r in edges}
    return VariableContextGraph(
        nodes=tuple(nodes),
        edges=tuple(sorted((s, d, int(r)) for s, d, r in edges)),
        target=target,
        variable=b.name,
        fn_id=fn.id,
        ordinal=b.ordinal,
    )
