"""Source front end: parsing, variable bindings, renaming and checks."""

from varmark.lang.checks import CheckReport, ast_check, check_pair, keyword_check
from varmark.lang.parser import FunctionUnit, Node, Token, parse_function
from varmark.lang.scope import (
    VariableBinding,
    analyze_scopes,
    check_new_name,
    list_variables,
    rename_tokens,
    rename_variable,
)
from varmark.lang.subtoken import is_identifier, render, split_name, subtokenize

__all__ = [
    "CheckReport",
    "FunctionUnit",
    "Node",
    "Token",
    "VariableBinding",
    "analyze_scopes",
    "ast_check",
    "check_new_name",
    "check_pair",
    "is_identifier",
    "keyword_check",
    "list_variables",
    "parse_function",
    "rename_tokens",
    "rename_variable",
    "render",
    "split_name",
    "subtokenize",
]
