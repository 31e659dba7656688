"""Parsing source functions into immutable token/tree snapshots."""

from __future__ import annotations

import ctypes
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import tree_sitter

from varmark.errors import UnparseableInput, UnsupportedLanguage
from varmark.lang import java

SUPPORTED_LANGUAGES = ("java",)
GRAMMAR_DIR_ENV = "VARMARK_GRAMMAR_DIR"


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    kind: str
    start: int  # byte offsets into the UTF-8 source
    end: int


@dataclass(frozen=True, slots=True)
class Node:
    index: int
    kind: str
    start: int
    end: int
    field: str | None
    named: bool
    is_error: bool
    is_missing: bool
    parent: int
    depth: int
    children: tuple[int, ...]
    token: int = -1  # token index for leaves

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class FunctionUnit:
    """One parsed function: source text, leaf tokens and the syntax tree.

    ``nodes`` holds the tree in pre-order; ``nodes[0]`` is the root and every
    node refers to its children and parent by index.
    """

    id: str
    language: str
    source: str
    tokens: tuple[Token, ...]
    nodes: tuple[Node, ...]
    data: bytes = field(repr=False, compare=False, default=b"")

    @property
    def tree(self) -> Node:
        return self.nodes[0]

    @property
    def has_error(self) -> bool:
        return any(n.is_error or n.is_missing for n in self.nodes)

    def error_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.is_error or n.is_missing]

    def text(self, node: Node) -> str:
        return self.data[node.start : node.end].decode("utf-8", errors="replace")

    def leaf(self, token_index: int) -> Node:
        return self.nodes[self._leaf_nodes()[token_index]]

    def _leaf_nodes(self) -> tuple[int, ...]:
        cached = self.__dict__.get("_leaf_cache")
        if cached is None:
            cached = tuple(n.index for n in self.nodes if n.is_leaf)
            object.__setattr__(self, "_leaf_cache", cached)
        return cached

    def code_tokens(self) -> list[Token]:
        """Tokens without comments; the unit for token counts and n-gram models."""
        return [t for t in self.tokens if t.kind not in java.COMMENT_KINDS]

    def ancestors(self, index: int):
        p = self.nodes[index].parent
        while p >= 0:
            yield self.nodes[p]
            p = self.nodes[p].parent


def _load_from_dir(language: str, grammar_dir: Path) -> tree_sitter.Language | None:
    for name in (f"{language}.so", f"libtree-sitter-{language}.so", f"tree-sitter-{language}.so"):
        path = grammar_dir / name
        if path.exists():
            lib = ctypes.cdll.LoadLibrary(str(path))
            entry = getattr(lib, f"tree_sitter_{language}")
            entry.restype = ctypes.c_void_p
            return tree_sitter.Language(entry())
    return None


@lru_cache(maxsize=None)
def get_language(language: str, grammar_dir: str | None = None) -> tree_sitter.Language:
    """Resolve a grammar, preferring ``grammar_dir`` (or $VARMARK_GRAMMAR_DIR)."""
    if language not in SUPPORTED_LANGUAGES:
        raise UnsupportedLanguage(f"no language tables for {language!r}")
    grammar_dir = grammar_dir or os.environ.get(GRAMMAR_DIR_ENV)
    if grammar_dir:
        lang = _load_from_dir(language, Path(grammar_dir))
        if lang is not None:
            return lang
    try:
        import tree_sitter_java
    except ImportError as exc:  # pragma: no cover - dependency is declared
        raise UnsupportedLanguage(f"grammar for {language!r} not installed") from exc
    return tree_sitter.Language(tree_sitter_java.language())


@lru_cache(maxsize=None)
def _parser(language: str, grammar_dir: str | None) -> tree_sitter.Parser:
    return tree_sitter.Parser(get_language(language, grammar_dir))


def parse_function(
    source: str, language: str = "java", fn_id: str = "", grammar_dir: str | None = None
) -> FunctionUnit:
    if language not in SUPPORTED_LANGUAGES:
        raise UnsupportedLanguage(f"no language tables for {language!r}")
    if not isinstance(source, str) or not source.strip():
        raise UnparseableInput("empty source")
    data = source.encode("utf-8")
    tree = _parser(language, grammar_dir).parse(data)
    root = tree.root_node
    if root is None or root.child_count == 0:
        raise UnparseableInput("parser produced no tree")

    nodes: list[Node] = []
    tokens: list[Token] = []
    # explicit stack: (ts node, field name, parent index, depth)
    stack = [(root, None, -1, 0)]
    pending_children: dict[int, list[int]] = {}
    while stack:
        ts_node, fname, parent, depth = stack.pop()
        idx = len(nodes)
        child_count = ts_node.child_count
        token = -1
        if child_count == 0:
            token = len(tokens)
            tokens.append(
                Token(
                    data[ts_node.start_byte : ts_node.end_byte].decode("utf-8", errors="replace"),
                    ts_node.type,
                    ts_node.start_byte,
                    ts_node.end_byte,
                )
            )
        nodes.append(
            Node(
                index=idx,
                kind=ts_node.type,
                start=ts_node.start_byte,
                end=ts_node.end_byte,
                field=fname,
                named=ts_node.is_named,
                is_error=ts_node.is_error,
                is_missing=ts_node.is_missing,
                parent=parent,
                depth=depth,
                children=(),
                token=token,
            )
        )
        if parent >= 0:
            pending_children.setdefault(parent, []).append(idx)
        if child_count:
            kids = ts_node.children
            for i in range(child_count - 1, -1, -1):
                stack.append((kids[i], ts_node.field_name_for_child(i), idx, depth + 1))

    final = tuple(
        Node(
            index=n.index,
            kind=n.kind,
            start=n.start,
            end=n.end,
            field=n.field,
            named=n.named,
            is_error=n.is_error,
            is_missing=n.is_missing,
            parent=n.parent,
            depth=n.depth,
            children=tuple(pending_children.get(n.index, ())),
            token=n.token,
        )
        for n in nodes
    )
    return FunctionUnit(
        id=fn_id, language=language, source=source, tokens=tuple(tokens), nodes=final, data=data
    )
