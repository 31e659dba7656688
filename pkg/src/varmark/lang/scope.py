"""Lexical scope analysis: variable bindings, their occurrences, and renaming."""

from __future__ import annotations

from dataclasses import dataclass, field

from varmark.errors import IllegalIdentifier, NameCollision, ReservedWord
from varmark.lang import java
from varmark.lang.parser import FunctionUnit, Node, parse_function
from varmark.lang.subtoken import is_identifier


@dataclass(frozen=True)
class VariableBinding:
    name: str
    occurrences: tuple[int, ...]  # token indices, ascending
    ordinal: int
    decl_kind: str
    visible: tuple[int, int]  # byte span from declaration to end of scope
    flags: tuple[str, ...] = ()

    @property
    def first_offset(self) -> int:
        return self.visible[0]


@dataclass
class _Builder:
    name: str
    decl_kind: str
    decl_token: int
    visible: tuple[int, int]
    occurrences: list[int] = field(default_factory=list)
    flags: tuple[str, ...] = ()


@dataclass
class ScopeInfo:
    bindings: list[VariableBinding]
    free_names: frozenset[str]  # identifiers that resolve to no local binding
    type_names: frozenset[str]


def _declaration_kind(fn: FunctionUnit, node: Node) -> str | None:
    """Kind of declaration when ``node`` is an identifier that introduces a local."""
    if node.kind != java.IDENTIFIER_KIND or node.parent < 0:
        return None
    parent = fn.nodes[node.parent]
    pk = parent.kind
    if node.field == "name":
        if pk == "variable_declarator":
            grand = fn.nodes[parent.parent].kind if parent.parent >= 0 else ""
            if grand == "local_variable_declaration":
                return "local"
            if grand == "spread_parameter":
                return "parameter"
            return None
        if pk in ("formal_parameter",):
            return "parameter"
        if pk == "catch_formal_parameter":
            return "catch"
        if pk == "enhanced_for_statement":
            return "foreach"
        if pk == "resource":
            return "resource"
    if pk == "lambda_expression" and node.field == "parameters":
        return "lambda"
    if pk == "inferred_parameters":
        return "lambda"
    return None


def _is_reference_site(fn: FunctionUnit, node: Node) -> bool:
    if node.kind != java.IDENTIFIER_KIND or node.parent < 0:
        return False
    parent = fn.nodes[node.parent]
    pk = parent.kind
    if pk == "field_access" and node.field == "field":
        return False
    if pk == "method_invocation" and node.field == "name":
        return False
    if pk == "method_reference" and parent.children and parent.children[0] != node.index:
        return False
    if pk in (
        "labeled_statement",
        "break_statement",
        "continue_statement",
        "marker_annotation",
        "annotation",
        "method_declaration",
        "constructor_declaration",
        "class_declaration",
        "interface_declaration",
        "enum_declaration",
        "record_declaration",
        "enum_constant",
        "scoped_identifier",
        "element_value_pair",
        "package_declaration",
        "import_declaration",
    ):
        return False
    if pk == "variable_declarator":
        grand = fn.nodes[parent.parent].kind if parent.parent >= 0 else ""
        if grand in ("field_declaration", "constant_declaration") and node.field == "name":
            return False
    return True


def analyze_scopes(fn: FunctionUnit) -> ScopeInfo:
    builders: list[_Builder] = []
    free: set[str] = set()
    types: set[str] = set()
    # each scope: (end byte, {name: builder})
    scopes: list[tuple[int, dict[str, _Builder]]] = [(len(fn.data), {})]

    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        idx, leaving = stack.pop()
        node = fn.nodes[idx]
        if leaving:
            scopes.pop()
            continue
        opens = node.kind in java.SCOPE_KINDS and idx != 0
        if opens:
            scopes.append((node.end, {}))
            stack.append((idx, True))
        if node.is_leaf:
            if node.kind == "type_identifier":
                types.add(fn.tokens[node.token].text)
            decl = _declaration_kind(fn, node)
            name = fn.tokens[node.token].text if node.token >= 0 else ""
            if decl is not None:
                end = scopes[-1][0]
                b = _Builder(
                    name=name,
                    decl_kind=decl,
                    decl_token=node.token,
                    visible=(node.start, end),
                    flags=("enhanced_for",) if decl == "foreach" else (),
                )
                b.occurrences.append(node.token)
                scopes[-1][1][name] = b
                builders.append(b)
            elif _is_reference_site(fn, node):
                for _, table in reversed(scopes):
                    hit = table.get(name)
                    if hit is not None:
                        hit.occurrences.append(node.token)
                        break
                else:
                    free.add(name)
            elif node.kind == java.IDENTIFIER_KIND:
                free.add(name)
        for child in reversed(node.children):
            stack.append((child, False))

    builders.sort(key=lambda b: fn.tokens[b.decl_token].start)
    bindings = [
        VariableBinding(
            name=b.name,
            occurrences=tuple(sorted(b.occurrences)),
            ordinal=i,
            decl_kind=b.decl_kind,
            visible=b.visible,
            flags=b.flags,
        )
        for i, b in enumerate(builders)
    ]
    return ScopeInfo(bindings, frozenset(free), frozenset(types))


def list_variables(fn: FunctionUnit) -> list[VariableBinding]:
    """Local variables and parameters, ordered by first appearance."""
    return analyze_scopes(fn).bindings


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def check_new_name(fn: FunctionUnit, b: VariableBinding, new_name: str, info: ScopeInfo | None = None) -> None:
    """Raise if ``new_name`` cannot replace ``b`` without changing meaning."""
    if not is_identifier(new_name):
        raise IllegalIdentifier(new_name)
    if new_name in java.protected_names():
        raise ReservedWord(new_name)
    if new_name == b.name:
        return
    info = info or analyze_scopes(fn)
    if new_name in info.free_names or new_name in info.type_names:
        raise NameCollision(f"{new_name!r} is already used in the function")
    for other in info.bindings:
        if other.ordinal != b.ordinal and other.name == new_name and _overlaps(other.visible, b.visible):
            raise NameCollision(f"{new_name!r} is visible in the scope of {b.name!r}")


def rename_variable(fn: FunctionUnit, b: VariableBinding, new_name: str) -> FunctionUnit:
    for tok in b.occurrences:
        if fn.tokens[tok].text != b.name:
            raise ValueError(f"binding {b.name!r} does not belong to function {fn.id!r}")
    check_new_name(fn, b, new_name)
    if new_name == b.name:
        return fn
    return rename_tokens(fn, {tok: new_name for tok in b.occurrences})


def rename_tokens(fn: FunctionUnit, replacements: dict[int, str]) -> FunctionUnit:
    """Replace token texts by index and re-parse; no legality checks."""
    data = bytearray(fn.data)
    for tok in sorted(replacements, reverse=True):
        t = fn.tokens[tok]
        data[t.start : t.end] = replacements[tok].encode("utf-8")
    return parse_function(data.decode("utf-8"), fn.language, fn_id=fn.id)
