import json
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varmark.errors import EmptyCorpus, NoStatementContext, SchemaError, TeacherUnavailable
from varmark.lang import list_variables, parse_function
from varmark.teacher import (
    END,
    LabelStore,
    SoftLabel,
    average,
    export_labels,
    load_exported_labels,
    top_k,
    train_corpus_teacher,
)


def _var(fn, name):
    return next(b for b in list_variables(fn) if b.name == name)


def test_single_statement_average_is_identity():
    fn = parse_function("int f(int x){int total = x; return 0;}")
    teacher = train_corpus_teacher([fn])
    b = _var(fn, "total")
    assert teacher.position0(fn, b) == pytest.approx(teacher.context_distribution("int", "="))


def test_two_statements_average_hand_distributions():
    p = {"a": 0.5, "b": 0.3, "c": 0.2}
    q = {"a": 0.1, "c": 0.6, "d": 0.3}
    avg = average([p, q])
    assert avg == pytest.approx({"a": 0.3, "b": 0.15, "c": 0.4, "d": 0.15})


def test_position0_averages_occurrences_then_statements():
    src = "int f(int x){int y = x + x; return y;}"
    fn = parse_function(src)
    teacher = train_corpus_teacher([fn])
    b = _var(fn, "x")
    cd = teacher.context_distribution
    decl = cd("int", ")")
    stmt = average([cd("=", "+"), cd("+", ";")])
    expected = average([decl, stmt])
    assert teacher.position0(fn, b) == pytest.approx(expected)


def test_k1_is_one_hot_on_best():
    assert top_k({"a": 0.2, "b": 0.5, "c": 0.3}, 1) == (("b", 1.0),)


def test_top_k_renormalizes_kept_entries():
    kept = dict(top_k({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, 2))
    assert kept == pytest.approx({"a": 4 / 7, "b": 3 / 7})


@given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3), st.floats(1e-6, 1.0), min_size=1, max_size=30), st.integers(1, 25))
def test_top_k_rows_are_distributions(dist, k):
    row = top_k(dist, k)
    assert len(row) <= k
    assert all(p >= 0 for _, p in row)
    assert math.isclose(sum(p for _, p in row), 1.0, abs_tol=1e-6)


def test_one_function_corpus_covers_its_own_names(mkdir_fn):
    teacher = train_corpus_teacher([mkdir_fn])
    b = _var(mkdir_fn, "dir")
    p0 = teacher.position0(mkdir_fn, b)
    assert p0["dir"] > 0 and p0["path"] > 0
    assert p0["dir"] == max(p0.values())


def test_unseen_context_is_uniform(mkdir_fn):
    teacher = train_corpus_teacher([mkdir_fn])
    dist = teacher.context_distribution("@@", "##")
    assert list(dist.values()) == pytest.approx([1 / teacher.size] * teacher.size)
    nxt = teacher.next_distribution("never-seen")
    assert list(nxt.values()) == pytest.approx([1 / (teacher.size + 1)] * (teacher.size + 1))


def test_bigram_matches_hand_counts():
    src = "void f(int userName, int userId, int nameMap, int id, int userNameMap){}"
    teacher = train_corpus_teacher([parse_function(src)])
    names = [["user", "name"], ["user", "id"], ["name", "map"], ["id"], ["user", "name", "map"]]
    counts = Counter()
    for subs in names:
        seq = subs + [END]
        counts.update(zip(seq, seq[1:]))
    syms = sorted({s for n in names for s in n}) + [END]
    for prev in syms[:-1]:
        row_total = sum(counts[(prev, s)] for s in syms)
        dist = teacher.next_distribution(prev)
        for s in syms:
            assert dist[s] == pytest.approx((counts[(prev, s)] + 1) / (row_total + len(syms)))


def test_soft_labels_shape(mkdir_fn):
    teacher = train_corpus_teacher([mkdir_fn])
    sl = teacher.soft_labels(mkdir_fn, _var(mkdir_fn, "dir"), k=3, max_len=5)
    # position 0 plus one bigram row per subtoken of `dir`
    assert len(sl) == 2 and sl.k == 3
    assert all(len(row) <= 3 for row in sl.positions)


def test_dense_drops_unknown_and_renormalizes():
    sl = SoftLabel(((("a", 0.5), ("zzz", 0.25), ("b", 0.25)),), 3)
    dense = sl.dense({"a": 0, "b": 1}, 3, 2)
    assert dense[0].tolist() == pytest.approx([2 / 3, 1 / 3, 0.0])
    assert dense[1].sum() == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5000))
def test_labels_are_distributions_on_synthetic_code(seed):
    from varmark.corpus import synthesize

    fns = [parse_function(r["code"], fn_id=r["id"]) for r in synthesize(3, seed=seed)]
    teacher = train_corpus_teacher(fns)
    for fn in fns:
        for b in list_variables(fn):
            sl = teacher.soft_labels(fn, b, k=20)
            for row in sl.positions:
                assert len(row) <= 20
                assert abs(sum(p for _, p in row) - 1.0) < 1e-6


def test_occurrences_past_truncation_are_ignored():
    filler = " ".join("k = k + 1;" for _ in range(110))
    src = f"int f(int k){{ {filler} int late = k; return late; }}"
    fn = parse_function(src)
    teacher = train_corpus_teacher([fn])
    with pytest.raises(NoStatementContext):
        teacher.position0(fn, _var(fn, "late"))


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train_corpus_teacher([parse_function("void f(){}")])


# exported labels


def _row(i):
    return {"fn_id": f"fn{i}", "var_ordinal": i % 3, "positions": [[["a", 0.75], ["b", 0.25]], [["<end>", 1.0]]]}


def _write(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


def test_valid_file_of_ten(tmp_path):
    store = load_exported_labels(_write(tmp_path / "l.jsonl", [_row(i) for i in range(10)]))
    assert len(store) == 10 and ("fn4", 1) in store


def test_duplicate_key(tmp_path):
    with pytest.raises(SchemaError):
        load_exported_labels(_write(tmp_path / "l.jsonl", [_row(1), _row(1)]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6))
def test_validator_sum_rule_on_fuzzed_rows(tmp_path_factory, probs):
    path = tmp_path_factory.mktemp("fz") / "l.jsonl"
    row = {"fn_id": "f", "var_ordinal": 0, "positions": [[[f"t{i}", p] for i, p in enumerate(probs)]]}
    _write(path, [row])
    if abs(sum(probs) - 1.0) > 1e-4:
        with pytest.raises(SchemaError):
            load_exported_labels(path)
    else:
        assert len(load_exported_labels(path)) == 1


@pytest.mark.parametrize(
    "bad",
    [
        "not json",
        json.dumps([1, 2]),
        json.dumps({"fn_id": 3, "var_ordinal": 0, "positions": [[["a", 1.0]]]}),
        json.dumps({"fn_id": "f", "var_ordinal": -1, "positions": [[["a", 1.0]]]}),
        json.dumps({"fn_id": "f", "var_ordinal": 0, "positions": []}),
        json.dumps({"fn_id": "f", "var_ordinal": 0, "positions": [[["a", 0.5], ["a", 0.5]]]}),
        json.dumps({"fn_id": "f", "var_ordinal": 0, "positions": [[["a", -0.5], ["b", 1.5]]]}),
    ],
)
def test_schema_violations(tmp_path, bad):
    (tmp_path / "l.jsonl").write_text(bad + "\n")
    with pytest.raises(SchemaError):
        load_exported_labels(tmp_path / "l.jsonl")


def test_export_load_round_trip_and_fallback(tmp_path, mkdir_fn):
    teacher = train_corpus_teacher([mkdir_fn])
    b = _var(mkdir_fn, "dir")
    sl = teacher.soft_labels(mkdir_fn, b)
    export_labels(tmp_path / "l.jsonl", [("mkdir", b.ordinal, sl)])
    store = load_exported_labels(tmp_path / "l.jsonl", fallback=teacher)
    got = store.get(mkdir_fn, b)
    assert [dict(r) for r in got.positions] == pytest.approx([dict(r) for r in sl.positions])
    other = _var(mkdir_fn, "path")
    assert store.get(mkdir_fn, other) == teacher.soft_labels(mkdir_fn, other)
    with pytest.raises(TeacherUnavailable):
        LabelStore({}).get(mkdir_fn, other)
