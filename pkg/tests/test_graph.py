"""Context graphs against an independent brute-force builder."""

from collections import deque

import numpy as np
import pytest
import torch
import tree_sitter
import tree_sitter_java
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MINIMAL, MKDIR
from varmark.corpus import synthesize
from varmark.errors import DimensionMismatch
from varmark.graph import Rel, VariableContextGraph, build_context_graph
from varmark.lang import list_variables, parse_function, rename_variable
from varmark.nn.gat import NodeEmbedder, featurize
from varmark.vocab import build_vocabs

SNIPPETS = [
    (MKDIR, "dir"),
    (MINIMAL, "a"),
    ("int sum(int n){int s=0; for(int i=0;i<n;i++){s+=i;} return s;}", "i"),
    (
        "void show(List<String> xs){ for (String x : xs) { if (x.isEmpty()) continue; System.out.println(x); } }",
        "x",
    ),
    ("int h(int a){ int b = a * a + a; while (b > 0) { b = b - a; } return b; }", "a"),
]

_DECLS = {"local_variable_declaration", "formal_parameter"}
_STOP = {"block"}


def _is_statement(kind):
    return kind.endswith("_statement") or kind in _DECLS


def reference_graph(source, name):
    """Straight from the definition, on the raw tree-sitter tree."""
    parser = tree_sitter.Parser(tree_sitter.Language(tree_sitter_java.language()))
    root = parser.parse(source.encode()).root_node

    def walk(n, depth=0):
        yield n, depth
        for c in n.children:
            yield from walk(c, depth + 1)

    all_nodes = list(walk(root))
    occ = [n for n, _ in all_nodes if n.type == "identifier" and n.text.decode() == name]
    depth = {(n.start_byte, n.end_byte, n.type): d for n, d in all_nodes}

    def key(n):
        return (n.start_byte, n.end_byte, n.type)

    def statement_of(n):
        p = n.parent
        while p is not None and not _is_statement(p.type):
            p = p.parent
        return p

    groups = {}
    for o in occ:
        groups.setdefault(key(statement_of(o)), (statement_of(o), []))[1].append(o)

    members, ast, nxt = {}, set(), set()
    occ_keys = {key(o) for o in occ}
    for s, occs in groups.values():
        on_path = set()
        for o in occs:
            p = o.parent
            while key(p) != key(s):
                on_path.add(key(p))
                p = p.parent
        queue, leaves = deque([s]), []
        while queue:
            n = queue.popleft()
            members[key(n)] = n
            if n.child_count == 0:
                leaves.append(n)
            for c in n.children:
                if "comment" in c.type:
                    continue
                if (_is_statement(c.type) or c.type in _STOP) and key(c) not in on_path:
                    continue
                ast.add((key(n), key(c)))
                queue.append(c)
        leaves.sort(key=lambda n: n.start_byte)
        for a, b in zip(leaves, leaves[1:]):
            nxt.add((key(a), key(b)))

    target = min(occ_keys)

    def canon(k):
        return target if k in occ_keys else k

    node_keys = sorted({canon(k) for k in members}, key=lambda k: (k[0], -k[1], depth[k], k[2]))
    gid = {k: i for i, k in enumerate(node_keys)}
    edges = set()
    for rel, pairs in ((Rel.AST, ast), (Rel.NEXT_TOKEN, nxt)):
        for a, b in pairs:
            a, b = gid[canon(a)], gid[canon(b)]
            if a != b:
                edges.add((a, b, int(rel)))
    t = gid[target]
    edges.add((t, t, int(Rel.SELF_LOOP)))
    edges |= {(d, s, int(Rel(r).reverse)) for s, d, r in edges}
    nodes = []
    for k in node_keys:
        n = members.get(k)
        leaf = n.child_count == 0
        nodes.append((k[2], n.text.decode() if leaf else "", k == target, leaf))
    return nodes, sorted(edges), t, ast, nxt


def _graph_for(source, name):
    fn = parse_function(source)
    b = [b for b in list_variables(fn) if b.name == name][0]
    return fn, b, build_context_graph(fn, b)


@pytest.mark.parametrize("source,name", SNIPPETS)
def test_graph_matches_brute_force(source, name):
    _, _, g = _graph_for(source, name)
    nodes, edges, target, _, _ = reference_graph(source, name)
    assert [(n.kind, n.text, n.is_target, n.is_leaf) for n in g.nodes] == nodes
    assert list(g.edges) == edges
    assert g.target == target


@pytest.mark.parametrize("source,name", SNIPPETS)
def test_edge_count_doubles_forward_edges(source, name):
    _, _, g = _graph_for(source, name)
    fwd = [e for e in g.edges if e[2] in (Rel.AST, Rel.NEXT_TOKEN, Rel.SELF_LOOP)]
    n_self = sum(e[2] == Rel.SELF_LOOP for e in fwd)
    assert n_self == 1
    assert len(g.edges) == 2 * len(fwd)


def _check_invariants(g: VariableContextGraph):
    assert sum(n.is_target for n in g.nodes) == 1
    assert g.nodes[g.target].is_target
    edges = set(g.edges)
    assert all((d, s, int(Rel(r).reverse)) in edges for s, d, r in edges)
    assert (g.target, g.target, int(Rel.SELF_LOOP)) in edges
    adj = {i: set() for i in range(g.num_nodes)}
    for s, d, _ in edges:
        adj[s].add(d)
    seen, stack = {g.target}, [g.target]
    while stack:
        for m in adj[stack.pop()] - seen:
            seen.add(m)
            stack.append(m)
    assert len(seen) == g.num_nodes


@pytest.mark.parametrize("source,name", SNIPPETS)
def test_structural_invariants_on_snippets(source, name):
    _check_invariants(_graph_for(source, name)[2])


def test_dir_graph_merges_three_statement_subtrees(mkdir_fn):
    _, _, g = _graph_for(MKDIR, "dir")
    roots = {"local_variable_declaration", "if_statement", "return_statement"}
    ast_parents = {d for s, d, r in g.edges if r == Rel.AST}
    root_ids = [n.id for n in g.nodes if n.kind in roots and n.id not in ast_parents]
    assert len(root_ids) == 3
    assert sum(n.text == "dir" for n in g.nodes) == 1


def test_single_statement_target_degree():
    _, _, g = _graph_for(MINIMAL.replace("return a;", "return 0;"), "a")
    incoming = [e for e in g.edges if e[1] == g.target]
    assert {Rel(e[2]) for e in incoming} >= {Rel.AST, Rel.SELF_LOOP}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5000))
def test_invariants_on_synthetic_functions(seed):
    fn = parse_function(synthesize(1, seed=seed)[0]["code"])
    for b in list_variables(fn):
        _check_invariants(build_context_graph(fn, b))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5000), st.integers(0, 50))
def test_rename_preserves_topology(seed, which):
    fn = parse_function(synthesize(1, seed=seed)[0]["code"])
    bs = list_variables(fn)
    b = bs[which % len(bs)]
    renamed = rename_variable(fn, b, "qqRenamed")
    g1 = build_context_graph(fn, b)
    g2 = build_context_graph(renamed, list_variables(renamed)[b.ordinal])
    assert g1.edges == g2.edges
    assert [n.kind for n in g1.nodes] == [n.kind for n in g2.nodes]


def test_edit_outside_target_statements_keeps_node_set():
    src = "int f(int a){int b = 1; b = b + 2; return a;}"
    edited = "int f(int a){int b = 1; b = b * 2 + 7; return a;}"
    g1, g2 = _graph_for(src, "a")[2], _graph_for(edited, "a")[2]
    assert g1 == g2


def test_graph_json_round_trip():
    g = _graph_for(MKDIR, "dir")[2]
    assert VariableContextGraph.from_json(g.to_json()) == g


def test_deterministic():
    assert _graph_for(MKDIR, "dir")[2].dumps() == _graph_for(MKDIR, "dir")[2].dumps()


# featurize


@pytest.fixture(scope="module")
def feat_setup():
    src = "int f(int userDetails){ if (userDetails > 0) { return userDetails; } int count = userDetails; return count; }"
    fn = parse_function(src)
    vocabs = build_vocabs([fn])
    torch.manual_seed(0)
    tables = NodeEmbedder(len(vocabs.kinds), len(vocabs.pieces), 8)
    return fn, vocabs, tables


def test_featurize_inner_node_is_kind_row(feat_setup):
    fn, vocabs, tables = feat_setup
    b = list_variables(fn)[0]
    g = build_context_graph(fn, b)
    x = featurize(g, vocabs, tables)
    assert x.shape == (g.num_nodes, 8)
    i = next(n.id for n in g.nodes if n.kind == "if_statement")
    assert torch.equal(x[i], tables.kinds.weight[vocabs.kinds["if_statement"]])


def test_featurize_leaf_is_kind_plus_mean_subtokens(feat_setup):
    fn, vocabs, tables = feat_setup
    count = list_variables(fn)[1]
    g = build_context_graph(fn, count)
    i = next(n.id for n in g.nodes if n.text == "userDetails")
    x = featurize(g, vocabs, tables)
    p = tables.pieces.weight
    expected = tables.kinds.weight[vocabs.kinds["identifier"]] + (p[vocabs.pieces["user"]] + p[vocabs.pieces["details"]]) / 2
    assert torch.allclose(x[i], expected, atol=1e-7)


def test_featurize_masks_the_target(feat_setup):
    fn, vocabs, tables = feat_setup
    g = build_context_graph(fn, list_variables(fn)[0])
    masked = featurize(g, vocabs, tables)
    real = featurize(g, vocabs, tables, mask_target=False)
    mask_row = tables.kinds.weight[vocabs.kinds["identifier"]] + tables.pieces.weight[vocabs.pieces["<mask>"]]
    assert torch.allclose(masked[g.target], mask_row)
    assert not torch.allclose(real[g.target], mask_row)
    assert torch.isfinite(masked).all()


def test_featurize_rejects_mismatched_tables(feat_setup):
    fn, vocabs, _ = feat_setup
    small = NodeEmbedder(3, 3, 8)
    with pytest.raises(DimensionMismatch):
        featurize(build_context_graph(fn, list_variables(fn)[0]), vocabs, small)


def test_paper_dimension_is_configurable():
    from varmark.nn.model import ModelConfig

    assert ModelConfig(feature_dim=512, head_dim=512).feature_dim == 512
    assert np.isclose(ModelConfig().feature_dim, 128)
