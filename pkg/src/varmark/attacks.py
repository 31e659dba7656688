"""Robustness attacks: block-structure rewrites (Type I), variable-attribute
rewrites (Type II) and random renaming (Type III).

Every rewrite works on byte spans of the parsed function and is re-parsed
afterwards; a rewrite that would produce a syntax error is dropped.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

from varmark.errors import VarmarkError
from varmark.lang import java
from varmark.lang.parser import FunctionUnit, Node, parse_function
from varmark.lang.scope import analyze_scopes, check_new_name, rename_tokens
from varmark.lang.subtoken import render, subtokenize

TYPE1_ATTRIBUTES = ("increment", "loop", "if_switch", "nested_if")
TYPE2_ATTRIBUTES = ("naming", "hoist", "init_split", "multi_decl", "temporary")
RENAME_FRACTIONS = (0.25, 0.5, 0.75, 1.0)

JUMPS = {"return_statement", "throw_statement", "break_statement", "continue_statement", "yield_statement"}
SIMPLE_LITERALS = {
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "character_literal",
    "string_literal",
    "true",
    "false",
}
NUMERIC = {"int", "long", "float", "double"}
CASE_LITERALS = {"decimal_integer_literal", "hex_integer_literal", "character_literal"}


@dataclass(frozen=True)
class AttackSpec:
    type: str  # "I", "II" or "III"
    attributes: tuple[str, ...] | None = None  # None = all attributes of the type
    p: float = 1.0  # rename fraction, Type III only
    seed: int = 0
    rate: float = 0.5  # chance of rewriting each applicable site (Types I and II)

    def __post_init__(self):
        if self.type not in ("I", "II", "III"):
            raise ValueError(f"unknown attack type {self.type!r}")
        if self.type == "III" and not 0 < self.p <= 1:
            raise ValueError("rename fraction must lie in (0, 1]")
        allowed = {"I": TYPE1_ATTRIBUTES, "II": TYPE2_ATTRIBUTES, "III": ()}[self.type]
        for a in self.attributes or ():
            if a not in allowed:
                raise ValueError(f"attribute {a!r} does not belong to Type {self.type}")

    @property
    def name(self) -> str:
        if self.type == "III":
            return f"type3_rename_{int(round(self.p * 100))}"
        return "type1" if self.type == "I" else "type2"


# tree helpers


def _text(fn: FunctionUnit, i: int) -> str:
    return fn.text(fn.nodes[i])


def _child(fn: FunctionUnit, node: Node, field: str) -> Node | None:
    for c in node.children:
        if fn.nodes[c].field == field:
            return fn.nodes[c]
    return None


def _children(fn: FunctionUnit, node: Node, field: str | None = None, named: bool = True) -> list[Node]:
    out = []
    for c in node.children:
        n = fn.nodes[c]
        if n.kind in java.COMMENT_KINDS:
            continue
        if field is not None and n.field != field:
            continue
        if named and not n.named:
            continue
        out.append(n)
    return out


def _descendants(fn: FunctionUnit, node: Node):
    stack = list(node.children)
    while stack:
        n = fn.nodes[stack.pop()]
        yield n
        stack.extend(n.children)


def _contains(fn: FunctionUnit, node: Node, kinds: set[str]) -> bool:
    return any(d.kind in kinds for d in _descendants(fn, node))


def _unwrap(fn: FunctionUnit, node: Node) -> Node:
    """Inner expression of a parenthesized condition."""
    if node.kind == "parenthesized_expression":
        inner = _children(fn, node)
        if len(inner) == 1:
            return inner[0]
    return node


def _ends_with_jump(fn: FunctionUnit, body: Node) -> bool:
    if body.kind == "block":
        stmts = _children(fn, body)
        return bool(stmts) and stmts[-1].kind in JUMPS
    return body.kind in JUMPS


def _block_inner(fn: FunctionUnit, body: Node) -> str:
    """Statements of a block without its braces, or a lone statement."""
    if body.kind == "block":
        return fn.data[body.start + 1 : body.end - 1].decode("utf-8")
    return fn.text(body)


def _operator(fn: FunctionUnit, node: Node) -> str | None:
    op = _child(fn, node, "operator")
    return fn.text(op) if op is not None else None


def _needs_parens(fn: FunctionUnit, expr: Node) -> bool:
    if expr.kind in ("ternary_expression", "assignment_expression", "lambda_expression"):
        return True
    return expr.kind == "binary_expression" and _operator(fn, expr) == "||"


def _in_block(fn: FunctionUnit, node: Node) -> bool:
    return node.parent >= 0 and fn.nodes[node.parent].kind in ("block", "switch_block_statement_group")


Edit = tuple[int, int, str]  # (start byte, end byte, replacement)


def _apply(fn: FunctionUnit, edits: list[Edit]) -> FunctionUnit:
    if not edits:
        return fn
    data = bytearray(fn.data)
    for start, end, text in sorted(edits, key=lambda e: e[0], reverse=True):
        data[start:end] = text.encode("utf-8")
    out = parse_function(data.decode("utf-8"), fn.language, fn.id)
    return fn if out.has_error else out


def _pick(rng: random.Random, rate: float, sites: list[tuple[Node, Edit]]) -> list[Edit]:
    """Random non-overlapping subset, outermost sites first."""
    chosen: list[Edit] = []
    for node, edit in sorted(sites, key=lambda s: (s[0].start, -s[0].end)):
        if rng.random() >= rate:
            continue
        if any(edit[0] < e[1] and e[0] < edit[1] for e in chosen):
            continue
        chosen.append(edit)
    return chosen


# Type I: block structure


def _increment_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    """i++ / i += 1 / i = i + 1 rewritten into one of the other forms.

    Only for variables declared int, long, float or double, where all three
    forms compile and mean the same.
    """
    info = analyze_scopes(fn)
    numeric = {tok for b in info.bindings if _declared_type(fn, b.occurrences[0]) in NUMERIC for tok in b.occurrences}
    sites = []
    for n in fn.nodes:
        parent = fn.nodes[n.parent] if n.parent >= 0 else None
        if parent is None or not (parent.kind == "expression_statement" or n.field == "update"):
            continue
        var, delta = None, None
        if n.kind == "update_expression":
            parts = _children(fn, n, named=False)
            ops = [fn.text(p) for p in parts if p.kind in ("++", "--")]
            ids = [p for p in parts if p.kind == "identifier"]
            if len(ops) == 1 and len(ids) == 1 and ids[0].token in numeric:
                var, delta = fn.text(ids[0]), ops[0][0]
        elif n.kind == "assignment_expression":
            left, right, op = _child(fn, n, "left"), _child(fn, n, "right"), _operator(fn, n)
            if left is None or right is None or left.kind != "identifier" or left.token not in numeric:
                continue
            name = fn.text(left)
            if op in ("+=", "-=") and fn.text(right) == "1":
                var, delta = name, op[0]
            elif op == "=" and right.kind == "binary_expression" and _operator(fn, right) in ("+", "-"):
                rl, rr = _child(fn, right, "left"), _child(fn, right, "right")
                if rl is not None and rr is not None and fn.text(rl) == name and fn.text(rr) == "1":
                    var, delta = name, _operator(fn, right)
        if var is None:
            continue
        forms = [f"{var}{delta}{delta}", f"{var} {delta}= 1", f"{var} = {var} {delta} 1"]
        current = fn.text(n)
        options = [f for f in forms if f.replace(" ", "") != current.replace(" ", "")]
        sites.append((n, (n.start, n.end, rng.choice(options))))
    return sites


def _loop_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    sites = []
    for n in fn.nodes:
        if n.kind == "for_statement":
            body = _child(fn, n, "body")
            inits = _children(fn, n, "init")
            cond = _child(fn, n, "condition")
            updates = _children(fn, n, "update")
            if body is None or len(inits) > 1 or _ends_with_jump(fn, body):
                continue
            if _contains(fn, body, {"continue_statement"}):
                continue
            if inits and inits[0].kind != "local_variable_declaration" and len(inits) != 1:
                continue
            init = ""
            if inits:
                init = fn.text(inits[0]) if inits[0].kind == "local_variable_declaration" else fn.text(inits[0]) + ";"
            cond_text = fn.text(cond) if cond is not None else "true"
            upd = " ".join(fn.text(u) + ";" for u in updates)
            loop = f"while ({cond_text}) {{{_block_inner(fn, body)} {upd}}}"
            text = f"{{{init} {loop}}}" if init else loop
            sites.append((n, (n.start, n.end, text)))
        elif n.kind == "while_statement":
            cond, body = _child(fn, n, "condition"), _child(fn, n, "body")
            if cond is None or body is None:
                continue
            sites.append((n, (n.start, n.end, f"for (; {fn.text(_unwrap(fn, cond))}; ) {fn.text(body)}")))
    return sites


def _if_chain(fn: FunctionUnit, n: Node):
    """(subject, [(literal, body)], else_body) for ``if (x == K) .. else if (x == K2) ..``."""
    arms, subject, node = [], None, n
    while True:
        cond = _unwrap(fn, _child(fn, node, "condition"))
        body = _child(fn, node, "consequence")
        if cond.kind != "binary_expression" or _operator(fn, cond) != "==":
            return None
        left, right = _child(fn, cond, "left"), _child(fn, cond, "right")
        if left is None or right is None or left.kind != "identifier" or right.kind not in CASE_LITERALS:
            return None
        if subject is None:
            subject = fn.text(left)
        elif fn.text(left) != subject:
            return None
        arms.append((fn.text(right), body))
        alt = _child(fn, node, "alternative")
        if alt is None:
            return subject, arms, None
        if alt.kind == "if_statement":
            node = alt
            continue
        return subject, arms, alt


def _if_switch_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    sites = []
    for n in fn.nodes:
        if n.kind == "if_statement" and not (n.field == "alternative"):
            chain = _if_chain(fn, n)
            if chain is None:
                continue
            subject, arms, other = chain
            if len({k for k, _ in arms}) != len(arms):
                continue
            bodies = [b for _, b in arms] + ([other] if other is not None else [])
            if any(_contains(fn, b, {"break_statement", "yield_statement"}) or b.kind in ("break_statement",) for b in bodies):
                continue
            parts = [f"switch ({subject}) {{"]
            for lit, body in arms:
                tail = "" if _ends_with_jump(fn, body) else " break;"
                parts.append(f"case {lit}: {{{_block_inner(fn, body)}}}{tail}")
            if other is not None:
                tail = "" if _ends_with_jump(fn, other) else " break;"
                parts.append(f"default: {{{_block_inner(fn, other)}}}{tail}")
            parts.append("}")
            sites.append((n, (n.start, n.end, " ".join(parts))))
        elif n.kind in ("switch_expression", "switch_statement") and n.parent >= 0:
            if fn.nodes[n.parent].kind not in ("block", "switch_block_statement_group"):
                continue  # a switch used as a value
            rewrite = _switch_to_if(fn, n)
            if rewrite is not None:
                sites.append((n, (n.start, n.end, rewrite)))
    return sites


def _switch_to_if(fn: FunctionUnit, n: Node) -> str | None:
    cond, body = _child(fn, n, "condition"), _child(fn, n, "body")
    subject = _unwrap(fn, cond) if cond is not None else None
    if subject is None or subject.kind != "identifier" or body is None:
        return None
    arms, default = [], None
    groups = _children(fn, body)
    for gi, g in enumerate(groups):
        if g.kind != "switch_block_statement_group":
            return None
        labels = [c for c in _children(fn, g) if c.kind == "switch_label"]
        stmts = [c for c in _children(fn, g) if c.kind != "switch_label"]
        if len(labels) != 1 or not stmts:
            return None
        if any(s.kind == "local_variable_declaration" for s in stmts):
            return None
        last = stmts[-1]
        if last.kind == "break_statement" and not _children(fn, last):
            stmts = stmts[:-1]
        elif last.kind not in ("return_statement", "throw_statement"):
            return None  # fall-through
        if any(s.kind == "break_statement" or _contains(fn, s, {"break_statement", "yield_statement"}) for s in stmts):
            return None
        label_vals = _children(fn, labels[0])
        code = " ".join(fn.text(s) for s in stmts)
        if not label_vals:
            if gi != len(groups) - 1:
                return None
            default = code
        else:
            if len(label_vals) != 1 or label_vals[0].kind not in CASE_LITERALS:
                return None
            arms.append((fn.text(label_vals[0]), code))
    if not arms:
        return None
    name = fn.text(subject)
    out = " else ".join(f"if ({name} == {lit}) {{{code}}}" for lit, code in arms)
    if default is not None:
        out += f" else {{{default}}}"
    return out


def _nested_if_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    sites = []
    for n in fn.nodes:
        if n.kind != "if_statement" or _child(fn, n, "alternative") is not None or n.field == "alternative":
            continue
        cond = _unwrap(fn, _child(fn, n, "condition"))
        body = _child(fn, n, "consequence")
        inner = body
        if body.kind == "block":
            stmts = _children(fn, body)
            inner = stmts[0] if len(stmts) == 1 else None
        if inner is not None and inner.kind == "if_statement" and _child(fn, inner, "alternative") is None:
            c2 = _unwrap(fn, _child(fn, inner, "condition"))
            a = f"({fn.text(cond)})" if _needs_parens(fn, cond) else fn.text(cond)
            b = f"({fn.text(c2)})" if _needs_parens(fn, c2) else fn.text(c2)
            sites.append((n, (n.start, n.end, f"if ({a} && {b}) {fn.text(_child(fn, inner, 'consequence'))}")))
        elif cond.kind == "binary_expression" and _operator(fn, cond) == "&&":
            left, right = _child(fn, cond, "left"), _child(fn, cond, "right")
            body_text = fn.text(body) if body.kind == "block" else f"{{{fn.text(body)}}}"
            sites.append((n, (n.start, n.end, f"if ({fn.text(left)}) {{if ({fn.text(right)}) {body_text}}}")))
    return sites


# Type II: variable attributes


def _naming(fn: FunctionUnit, rng: random.Random, rate: float) -> FunctionUnit:
    style = rng.choice(["camel", "pascal", "snake", "underscore_init"])
    info = analyze_scopes(fn)
    for ordinal in range(len(info.bindings)):
        b = info.bindings[ordinal]
        if rng.random() >= rate:
            continue
        new = render(subtokenize(b.name), style)
        if new == b.name:
            continue
        try:
            check_new_name(fn, b, new, info)
        except VarmarkError:
            continue
        fn = rename_tokens(fn, {t: new for t in b.occurrences})
        info = analyze_scopes(fn)
    return fn


def _method_body(fn: FunctionUnit) -> Node | None:
    for n in fn.nodes:
        if n.kind in ("method_declaration", "constructor_declaration"):
            return _child(fn, n, "body")
    return None


def _simple_decl(fn: FunctionUnit, n: Node) -> tuple[str, str, Node | None] | None:
    """(type+modifiers text, name, initializer) of a one-declarator local declaration."""
    if n.kind != "local_variable_declaration":
        return None
    decls = _children(fn, n, "declarator")
    if len(decls) != 1:
        return None
    d = decls[0]
    name = _child(fn, d, "name")
    if name is None or _child(fn, d, "dimensions") is not None:
        return None
    head = fn.data[n.start : d.start].decode("utf-8").strip()
    return head, fn.text(name), _child(fn, d, "value")


def _hoist_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    """Move a declaration between the start of the method body and just before its first use."""
    body = _method_body(fn)
    if body is None:
        return []
    stmts = _children(fn, body)
    info = analyze_scopes(fn)
    counts: dict[str, int] = {}
    for b in info.bindings:
        counts[b.name] = counts.get(b.name, 0) + 1
    sites = []
    for i, s in enumerate(stmts):
        decl = _simple_decl(fn, s)
        if decl is None:
            continue
        head, name, value = decl
        if counts.get(name) != 1 or "var" == head.split()[-1]:
            continue
        if value is not None and value.kind not in SIMPLE_LITERALS:
            continue
        uses = [j for j, t in enumerate(stmts) if j != i and any(
            d.kind == "identifier" and fn.text(d) == name for d in _descendants(fn, t))]
        if not uses:
            continue
        first = uses[0]
        if first < i:
            continue  # cannot happen for a proper declaration
        text = fn.text(s)
        if i > 0:
            target = stmts[0].start  # up to the start of the body
        elif first > i + 1:
            target = stmts[first].start  # down to just before the first use
        else:
            continue
        sites.append((s, (s.start, s.end, "")))
        sites.append((s, (target, target, text + " ")))
    return sites


def _hoist(fn: FunctionUnit, rng: random.Random, rate: float) -> FunctionUnit:
    """One declaration move at a time: edits come in delete/insert pairs."""
    sites = _hoist_sites(fn, rng)
    pairs = [sites[k : k + 2] for k in range(0, len(sites), 2)]
    for pair in pairs:
        if rng.random() >= rate:
            continue
        out = _apply(fn, [e for _, e in pair])
        if out is not fn:
            return out
    return fn


def _init_split_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    sites = []
    for n in fn.nodes:
        if not _in_block(fn, n):
            continue
        decl = _simple_decl(fn, n)
        if decl is not None:
            head, name, value = decl
            words = head.split()
            if value is None or words[-1] == "var" or "final" in words or value.kind == "array_initializer":
                continue
            sites.append((n, (n.start, n.end, f"{head} {name}; {name} = {fn.text(value)};")))
    # merge: ``T x; x = e;`` on consecutive statements
    for n in fn.nodes:
        if n.kind != "block" and n.kind != "switch_block_statement_group":
            continue
        stmts = _children(fn, n)
        for a, b in zip(stmts, stmts[1:]):
            decl = _simple_decl(fn, a)
            if decl is None or decl[2] is not None or b.kind != "expression_statement":
                continue
            expr = _children(fn, b)[0] if _children(fn, b) else None
            if expr is None or expr.kind != "assignment_expression" or _operator(fn, expr) != "=":
                continue
            left, right = _child(fn, expr, "left"), _child(fn, expr, "right")
            if left.kind != "identifier" or fn.text(left) != decl[1]:
                continue
            if any(d.kind == "identifier" and fn.text(d) == decl[1] for d in _descendants(fn, right)):
                continue
            merged = f"{decl[0]} {decl[1]} = {fn.text(right)};"
            sites.append((a, (a.start, b.end, merged)))
    return sites


def _multi_decl_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    sites = []
    for n in fn.nodes:
        if n.kind != "local_variable_declaration" or not _in_block(fn, n):
            continue
        decls = _children(fn, n, "declarator")
        if len(decls) < 2:
            continue
        head = fn.data[n.start : decls[0].start].decode("utf-8").strip()
        if head.split()[-1] == "var":
            continue
        sites.append((n, (n.start, n.end, " ".join(f"{head} {fn.text(d)};" for d in decls))))
    for n in fn.nodes:
        if n.kind not in ("block", "switch_block_statement_group"):
            continue
        stmts = _children(fn, n)
        for a, b in zip(stmts, stmts[1:]):
            if a.kind != "local_variable_declaration" or b.kind != "local_variable_declaration":
                continue
            da, db = _children(fn, a, "declarator"), _children(fn, b, "declarator")
            ha = fn.data[a.start : da[0].start].decode("utf-8").strip()
            hb = fn.data[b.start : db[0].start].decode("utf-8").strip()
            if ha != hb or ha.split()[-1] == "var":
                continue
            names_a = {fn.text(_child(fn, d, "name")) for d in da}
            if any(d.kind == "identifier" and fn.text(d) in names_a for d in _descendants(fn, b)
                   if d.field != "name"):
                continue
            text = f"{ha} " + ", ".join(fn.text(d) for d in da + db) + ";"
            sites.append((a, (a.start, b.end, text)))
    return sites


def _declared_type(fn: FunctionUnit, tok: int) -> str | None:
    leaf = fn.leaf(tok)
    for anc in fn.ancestors(leaf.index):
        if anc.kind in ("local_variable_declaration", "formal_parameter", "catch_formal_parameter",
                        "enhanced_for_statement", "resource"):
            t = _child(fn, anc, "type")
            return fn.text(t) if t is not None and fn.text(t) != "var" else None
        if anc.kind in ("block", "method_declaration", "lambda_expression"):
            return None
    return None


def _temporary_sites(fn: FunctionUnit, rng: random.Random) -> list[tuple[Node, Edit]]:
    """``x = e;`` becomes ``T tmp = e; x = tmp;`` with T the declared type of x."""
    info = analyze_scopes(fn)
    used = {t.text for t in fn.tokens}
    by_token = {tok: b for b in info.bindings for tok in b.occurrences}
    sites = []
    k = 0
    for n in fn.nodes:
        if n.kind != "expression_statement" or not _in_block(fn, n):
            continue
        kids = _children(fn, n)
        if len(kids) != 1 or kids[0].kind != "assignment_expression" or _operator(fn, kids[0]) != "=":
            continue
        left, right = _child(fn, kids[0], "left"), _child(fn, kids[0], "right")
        if left.kind != "identifier" or left.token not in by_token or right.kind in ("null_literal", "lambda_expression", "array_initializer"):
            continue
        b = by_token[left.token]
        typ = _declared_type(fn, b.occurrences[0])
        if typ is None:
            continue
        while f"tmp{k}" in used:
            k += 1
        tmp = f"tmp{k}"
        used.add(tmp)
        sites.append((n, (n.start, n.end, f"{typ} {tmp} = {fn.text(right)}; {fn.text(left)} = {tmp};")))
    return sites


SiteFinder = Callable[[FunctionUnit, random.Random], list]
_SITES: dict[str, SiteFinder] = {
    "increment": _increment_sites,
    "loop": _loop_sites,
    "if_switch": _if_switch_sites,
    "nested_if": _nested_if_sites,
    "init_split": _init_split_sites,
    "multi_decl": _multi_decl_sites,
    "temporary": _temporary_sites,
}


def _run(fn: FunctionUnit, attributes: tuple[str, ...], rng: random.Random, rate: float) -> FunctionUnit:
    for attr in attributes:
        if attr == "naming":
            fn = _naming(fn, rng, rate)
        elif attr == "hoist":
            fn = _hoist(fn, rng, rate)
        else:
            edits = _pick(rng, rate, _SITES[attr](fn, rng))
            out = _apply(fn, edits)
            if out is fn and len(edits) > 1:
                # the combined rewrite did not parse; keep the first edit that does
                for e in edits:
                    out = _apply(fn, [e])
                    if out is not fn:
                        break
            fn = out
    return fn


def _rng(seed: int, index: int, tag: str) -> random.Random:
    return random.Random(f"{tag}:{seed}:{index}")


def attack_type1(fn: FunctionUnit, seed: int = 0, attributes=None, rate: float = 0.5, index: int = 0) -> FunctionUnit:
    return _run(fn, tuple(attributes or TYPE1_ATTRIBUTES), _rng(seed, index, "I"), rate)


def attack_type2(fn: FunctionUnit, seed: int = 0, attributes=None, rate: float = 0.5, index: int = 0) -> FunctionUnit:
    return _run(fn, tuple(attributes or TYPE2_ATTRIBUTES), _rng(seed, index, "II"), rate)


def attack_type3(fn: FunctionUnit, p: float, seed: int = 0, index: int = 0) -> FunctionUnit:
    """Rename ceil(p * V) uniformly chosen variables to var0, var1, ..."""
    if not 0 < p <= 1:
        raise ValueError("rename fraction must lie in (0, 1]")
    rng = _rng(seed, index, "III")
    info = analyze_scopes(fn)
    n = len(info.bindings)
    chosen = sorted(rng.sample(range(n), math.ceil(p * n))) if n else []
    used = {t.text for t in fn.tokens}
    k = 0
    for ordinal in chosen:
        b = info.bindings[ordinal]
        while True:
            name = f"var{k}"
            k += 1
            if name in used:
                continue
            try:
                check_new_name(fn, b, name, info)
                break
            except VarmarkError:
                continue
        used.add(name)
        fn = rename_tokens(fn, {t: name for t in b.occurrences})
        info = analyze_scopes(fn)
    return fn


def apply_attack(source: str, spec: AttackSpec, language: str = "java", index: int = 0) -> str:
    fn = parse_function(source, language)
    if spec.type == "I":
        out = attack_type1(fn, spec.seed, spec.attributes, spec.rate, index)
    elif spec.type == "II":
        out = attack_type2(fn, spec.seed, spec.attributes, spec.rate, index)
    else:
        out = attack_type3(fn, spec.p, spec.seed, index)
    return out.source


def standard_attacks(seed: int = 0) -> list[AttackSpec]:
    return [AttackSpec("I", seed=seed), AttackSpec("II", seed=seed)] + [
        AttackSpec("III", p=p, seed=seed) for p in RENAME_FRACTIONS
    ]
