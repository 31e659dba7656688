"""Corpus I/O (JSON lines) and a seeded generator of synthetic Java methods.

The generator stands in for a CodeSearchNet-style Java subset: short methods
with typed locals, loops, conditionals, switch statements and the other
constructs the robustness attacks rewrite.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from varmark.errors import SchemaError

REQUIRED_KEYS = ("id", "code", "language")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict) or any(not isinstance(rec.get(k), str) for k in REQUIRED_KEYS):
                raise SchemaError(f"{path}:{lineno}: expected string fields {REQUIRED_KEYS}")
            records.append(rec)
    return records


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def split_corpus(records: list[dict], valid_frac: float = 0.1, test_frac: float = 0.1, seed: int = 0):
    """Deterministic train/valid/test split."""
    order = list(range(len(records)))
    random.Random(seed).shuffle(order)
    n_valid = int(round(len(records) * valid_frac))
    n_test = int(round(len(records) * test_frac))
    valid = [records[i] for i in order[:n_valid]]
    test = [records[i] for i in order[n_valid : n_valid + n_test]]
    train = [records[i] for i in order[n_valid + n_test :]]
    return train, valid, test


# name pools per type; earlier entries are drawn more often
NAMES = {
    "String": [
        "name", "path", "message", "text", "key", "value", "line", "title", "prefix",
        "label", "content", "url", "query", "userName", "fileName", "filePath",
        "errorMessage", "displayName", "suffix", "header", "token", "str", "input",
        "output", "description", "format", "pattern", "host", "address", "email",
    ],
    "int": [
        "count", "index", "size", "total", "offset", "length", "max", "min", "num",
        "limit", "width", "height", "pos", "start", "end", "step", "retries",
        "numErrors", "maxCount", "capacity", "depth", "level", "port", "code", "status",
    ],
    "long": [
        "timeout", "timestamp", "elapsed", "startTime", "endTime", "duration", "userId",
        "delay", "bytes", "fileSize", "interval", "deadline",
    ],
    "boolean": [
        "found", "valid", "done", "enabled", "success", "ready", "changed", "flag",
        "isEmpty", "hasNext", "visible", "active", "matched",
    ],
    "double": [
        "ratio", "score", "rate", "weight", "average", "sum", "factor", "threshold",
        "price", "amount", "delta", "scale",
    ],
    "List<String>": [
        "names", "items", "lines", "keys", "values", "parts", "tokens", "results",
        "paths", "words", "entries", "tags", "columns", "args",
    ],
    "Map<String, Integer>": [
        "counts", "cache", "lookup", "map", "scores", "frequencies", "indexMap",
        "sizes", "totals", "defaultValueMap",
    ],
    "File": [
        "file", "dir", "directory", "parent", "root", "target", "source", "outputFile",
        "configFile", "baseDir", "tempFile",
    ],
    "StringBuilder": ["sb", "builder", "buffer", "out", "result", "msg"],
    "User": ["user", "owner", "author", "member", "customer", "account", "userDetails", "current"],
}
LOOP_NAMES = ["i", "j", "k", "idx", "n"]
TYPES = list(NAMES)
VERBS = ["get", "find", "build", "compute", "load", "update", "process", "create", "check", "parse", "format", "count"]
NOUNS = ["User", "Path", "Config", "Report", "Entry", "Value", "Item", "Name", "Index", "Total", "Result", "Cache"]
WORDS = ["a", "b", "x", "ok", "none", "default", "tmp", "main", "test", "data"]


def _zipf_choice(rng: random.Random, pool: list[str]) -> str:
    weights = [1.0 / (r + 1) ** 0.8 for r in range(len(pool))]
    return rng.choices(pool, weights=weights, k=1)[0]


@dataclass
class _Env:
    rng: random.Random
    vars: dict[str, list[str]] = field(default_factory=dict)  # type -> names
    used: set[str] = field(default_factory=set)
    tmp_counter: int = 0

    def fresh(self, typ: str) -> str:
        pool = NAMES[typ]
        for _ in range(20):
            cand = _zipf_choice(self.rng, pool)
            if cand not in self.used:
                self.used.add(cand)
                return cand
        for cand in pool:
            if cand not in self.used:
                self.used.add(cand)
                return cand
        self.tmp_counter += 1
        cand = f"{pool[0]}{self.tmp_counter}"
        self.used.add(cand)
        return cand

    def declare(self, typ: str) -> str:
        name = self.fresh(typ)
        self.vars.setdefault(typ, []).append(name)
        return name

    def pick(self, typ: str) -> str | None:
        pool = self.vars.get(typ)
        return self.rng.choice(pool) if pool else None


def _lit(rng: random.Random, typ: str) -> str:
    if typ == "String":
        return '"' + rng.choice(WORDS) + '"'
    if typ == "int":
        return str(rng.choice([0, 1, 2, 10, 16, 100]))
    if typ == "long":
        return str(rng.choice([0, 1000, 60000])) + "L"
    if typ == "boolean":
        return rng.choice(["true", "false"])
    if typ == "double":
        return rng.choice(["0.0", "1.0", "0.5", "100.0"])
    if typ == "List<String>":
        return "new ArrayList<>()"
    if typ == "Map<String, Integer>":
        return "new HashMap<>()"
    if typ == "File":
        return 'new File("' + rng.choice(WORDS) + '")'
    if typ == "StringBuilder":
        return "new StringBuilder()"
    return "new User()"


def _expr(env: _Env, typ: str) -> str:
    """An expression of type ``typ`` built from variables in scope."""
    rng = env.rng
    s, i, lst, mp, f, u = (env.pick(t) for t in ("String", "int", "List<String>", "Map<String, Integer>", "File", "User"))
    options: list[str] = [_lit(rng, typ)]
    if typ == "String":
        if s:
            options += [f"{s}.trim()", f"{s}.toLowerCase()", f'{s} + "/"', f"{s}.substring({i or 0})"]
        if i:
            options.append(f"String.valueOf({i})")
        if f:
            options.append(f"{f}.getName()")
        if u:
            options.append(f"{u}.getName()")
        if lst and i:
            options.append(f"{lst}.get({i})")
    elif typ == "int":
        if s:
            options.append(f"{s}.length()")
        if lst:
            options.append(f"{lst}.size()")
        if i:
            options += [f"{i} + 1", f"{i} * 2", f"Math.max({i}, 0)"]
        if mp and s:
            options.append(f"{mp}.getOrDefault({s}, 0)")
    elif typ == "long":
        options.append("System.currentTimeMillis()")
        if f:
            options.append(f"{f}.length()")
    elif typ == "boolean":
        if s:
            options += [f"{s}.isEmpty()", f"{s} != null"]
        if lst and s:
            options.append(f"{lst}.contains({s})")
        if i:
            options.append(f"{i} > 0")
        if f:
            options.append(f"{f}.exists()")
    elif typ == "double":
        if i:
            options += [f"{i} / 2.0", f"Math.sqrt({i})"]
    elif typ == "List<String>":
        if mp:
            options.append(f"new ArrayList<>({mp}.keySet())")
        if s:
            options.append(f'Arrays.asList({s}.split(","))')
    elif typ == "File":
        if f and s:
            options.append(f"new File({f}, {s})")
        if f:
            options.append(f"{f}.getParentFile()")
    elif typ == "User":
        if s:
            options.append(f"new User({s})")
        if lst:
            options.append(f"lookupUser({lst}.get(0))")
    if len(options) > 1 and rng.random() > 0.15:
        options = options[1:]
    return rng.choice(options)


def _cond(env: _Env) -> str:
    return _expr(env, "boolean")


def _simple_stmt(env: _Env) -> str:
    """A one-line statement with side effects on existing variables."""
    rng = env.rng
    choices = []
    i = env.pick("int")
    if i:
        choices += [f"{i}++;", f"{i} += 1;", f"{i} = {i} + 1;", f"{i}--;", f"{i} = {_expr(env, 'int')};"]
    lst = env.pick("List<String>")
    s = env.pick("String")
    if lst and s:
        choices += [f"{lst}.add({s});", f"{lst}.remove({s});"]
    sb = env.pick("StringBuilder")
    if sb:
        choices.append(f"{sb}.append({s or _lit(rng, 'String')});")
    mp = env.pick("Map<String, Integer>")
    if mp and s:
        choices.append(f"{mp}.put({s}, {i or 0});")
    if s:
        choices += [f"System.out.println({s});", f"{s} = {_expr(env, 'String')};"]
    d = env.pick("double")
    if d:
        choices.append(f"{d} = {d} * 2;")
    b = env.pick("boolean")
    if b:
        choices.append(f"{b} = {_cond(env)};")
    if not choices:
        choices.append('System.out.println("' + rng.choice(WORDS) + '");')
    return rng.choice(choices)


def _block(env: _Env, depth: int, n: int | None = None) -> list[str]:
    n = n if n is not None else env.rng.randint(1, 2)
    return [_simple_stmt(env) for _ in range(n)]


def _stmt(env: _Env, depth: int) -> list[str]:
    rng = env.rng
    kind = rng.choices(
        ["decl", "multi_decl", "split_decl", "for", "foreach", "while", "if", "if_chain", "switch",
         "nested_if", "and_if", "simple", "temp", "try"],
        weights=[6, 1.2, 1, 2, 1.5, 1, 2, 1, 0.8, 1, 1, 3, 0.8, 0.8],
    )[0]
    if depth > 0 and kind in ("for", "foreach", "while", "switch", "if_chain", "try"):
        kind = "simple"
    if kind == "decl":
        typ = rng.choice(TYPES)
        init = _expr(env, typ)
        name = env.declare(typ)
        return [f"{typ} {name} = {init};"]
    if kind == "multi_decl":
        typ = rng.choice(["int", "String", "double", "boolean"])
        a, b = env.declare(typ), env.declare(typ)
        if rng.random() < 0.5:
            return [f"{typ} {a} = {_lit(rng, typ)}, {b} = {_lit(rng, typ)};"]
        return [f"{typ} {a}, {b};", f"{a} = {_lit(rng, typ)};", f"{b} = {_lit(rng, typ)};"]
    if kind == "split_decl":
        typ = rng.choice(["int", "String", "long", "double"])
        init = _expr(env, typ)
        name = env.declare(typ)
        return [f"{typ} {name};", f"{name} = {init};"]
    if kind == "for":
        bound = env.pick("int") or (f"{env.pick('List<String>')}.size()" if env.pick("List<String>") else "10")
        loop = rng.choice([n for n in LOOP_NAMES if n not in env.used] or ["i"])
        env.vars.setdefault("int", []).append(loop)
        body = _block(env, depth + 1)
        env.vars["int"].remove(loop)
        upd = rng.choice([f"{loop}++", f"++{loop}", f"{loop} += 1"])
        return [f"for (int {loop} = 0; {loop} < {bound}; {upd}) {{", *("    " + b for b in body), "}"]
    if kind == "foreach":
        lst = env.pick("List<String>")
        if not lst:
            return [_simple_stmt(env)]
        item = env.fresh("String")
        env.vars.setdefault("String", []).append(item)
        body = _block(env, depth + 1)
        env.vars["String"].remove(item)
        return [f"for (String {item} : {lst}) {{", *("    " + b for b in body), "}"]
    if kind == "while":
        i = env.pick("int")
        if not i:
            return [_simple_stmt(env)]
        body = _block(env, depth + 1)
        return [f"while ({i} < {_lit(rng, 'int')}) {{", *("    " + b for b in body), f"    {i}++;", "}"]
    if kind == "if":
        body = _block(env, depth + 1)
        lines = [f"if ({_cond(env)}) {{", *("    " + b for b in body), "}"]
        if rng.random() < 0.4:
            lines[-1] = "} else {"
            lines += ["    " + _simple_stmt(env), "}"]
        return lines
    if kind == "if_chain":
        i = env.pick("int")
        if not i:
            return [_simple_stmt(env)]
        lines = []
        for k in range(rng.randint(2, 3)):
            head = "if" if k == 0 else "} else if"
            lines += [f"{head} ({i} == {k + 1}) {{", "    " + _simple_stmt(env)]
        lines += ["} else {", "    " + _simple_stmt(env), "}"]
        return lines
    if kind == "switch":
        i = env.pick("int")
        if not i:
            return [_simple_stmt(env)]
        lines = [f"switch ({i}) {{"]
        for k in range(rng.randint(2, 3)):
            lines += [f"    case {k}:", "        " + _simple_stmt(env), "        break;"]
        lines += ["    default:", "        " + _simple_stmt(env), "        break;", "}"]
        return lines
    if kind == "nested_if":
        body = _block(env, depth + 2)
        return [f"if ({_cond(env)}) {{", f"    if ({_cond(env)}) {{", *("        " + b for b in body), "    }", "}"]
    if kind == "and_if":
        body = _block(env, depth + 1)
        return [f"if ({_cond(env)} && {_cond(env)}) {{", *("    " + b for b in body), "}"]
    if kind == "temp":
        i = env.pick("int")
        if not i:
            return [_simple_stmt(env)]
        name = env.declare("int")
        return [f"int {name} = {i}++;"]
    if kind == "try":
        body = _block(env, depth + 1)
        ex = rng.choice(["e", "ex", "err", "exception"])
        return [
            "try {",
            *("    " + b for b in body),
            f"}} catch (IOException {ex}) {{",
            f"    log.warn({ex}.getMessage());",
            "}",
        ]
    return [_simple_stmt(env)]


def synth_function(rng: random.Random) -> str:
    env = _Env(rng)
    ret = rng.choice(["void", "String", "int", "boolean", "List<String>", "File", "double"])
    verb, noun = rng.choice(VERBS), rng.choice(NOUNS)
    params = []
    for _ in range(rng.randint(0, 3)):
        typ = rng.choice(TYPES)
        params.append(f"{typ} {env.declare(typ)}")
    mods = rng.choice(["public", "private", "public static", "protected"])
    body: list[str] = []
    n_stmts = rng.randint(3, 7)
    # guarantee at least one local
    typ = rng.choice(TYPES)
    init = _expr(env, typ)
    body.append(f"{typ} {env.declare(typ)} = {init};")
    for _ in range(n_stmts):
        body += _stmt(env, 0)
    if ret != "void":
        body.append(f"return {env.pick(ret) or _lit(rng, ret) if ret in NAMES else _lit(rng, ret)};")
    lines = [f"{mods} {ret} {verb}{noun}({', '.join(params)}) {{", *("    " + b for b in body), "}"]
    return "\n".join(lines)


def synthesize(n: int, seed: int = 0, prefix: str = "syn") -> list[dict]:
    rng = random.Random(seed)
    return [
        {"id": f"{prefix}-{k:05d}", "code": synth_function(rng), "language": "java"}
        for k in range(n)
    ]
