"""Java language tables: reserved words, statement kinds, binding sites."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

RESERVED_WORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized this
    throw throws transient try void volatile while true false null _
    var yield record sealed permits
    """.split()
)

# Statement-like kinds: the unit a context subtree is cut at.
STATEMENT_KINDS = frozenset(
    {
        "expression_statement",
        "local_variable_declaration",
        "if_statement",
        "for_statement",
        "enhanced_for_statement",
        "while_statement",
        "do_statement",
        "return_statement",
        "throw_statement",
        "break_statement",
        "continue_statement",
        "yield_statement",
        "try_statement",
        "try_with_resources_statement",
        "switch_expression",
        "synchronized_statement",
        "labeled_statement",
        "assert_statement",
        "explicit_constructor_invocation",
        "local_class_declaration",
        # declarations count as statements
        "formal_parameter",
        "spread_parameter",
        "catch_formal_parameter",
        "resource",
        "field_declaration",
        "constant_declaration",
    }
)

# Children of these kinds are not descended into when cutting a statement subtree.
SUBTREE_STOP_KINDS = STATEMENT_KINDS | {"block", "switch_block", "class_body"}

# Nodes that open a lexical scope for local bindings.
SCOPE_KINDS = frozenset(
    {
        "method_declaration",
        "constructor_declaration",
        "lambda_expression",
        "block",
        "for_statement",
        "enhanced_for_statement",
        "catch_clause",
        "try_with_resources_statement",
        "switch_block",
        "class_body",
    }
)

COMMENT_KINDS = frozenset({"line_comment", "block_comment"})
STRING_KINDS = frozenset({"string_fragment", "escape_sequence", "multiline_string_fragment"})
IDENTIFIER_KIND = "identifier"


@lru_cache(maxsize=None)
def protected_class_names() -> frozenset[str]:
    text = resources.files("varmark.lang").joinpath("data/protected_java.txt").read_text()
    names = (line.strip() for line in text.splitlines())
    return frozenset(n for n in names if n and not n.startswith("#"))


def protected_names() -> frozenset[str]:
    return RESERVED_WORDS | protected_class_names()
