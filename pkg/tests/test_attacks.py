import re
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varmark.attacks import (
    TYPE1_ATTRIBUTES,
    TYPE2_ATTRIBUTES,
    AttackSpec,
    apply_attack,
    attack_type3,
    standard_attacks,
)
from varmark.corpus import synthesize
from varmark.lang import list_variables, parse_function
from varmark.lang.subtoken import subtokenize

LOOP = "int s(int n){int t=0; for(int i=0;i<n;i++){t+=i;} return t;}"


def _one(kind, attr, src, **kw):
    return apply_attack(src, AttackSpec(kind, attributes=(attr,), rate=1.0, **kw))


def _names(src):
    return [b.name for b in list_variables(parse_function(src))]


def test_for_becomes_while():
    out = _one("I", "loop", LOOP)
    assert "for" not in re.findall(r"\w+", out) and "while (i<n)" in out
    assert not parse_function(out).has_error


def test_no_loops_means_no_change():
    src = "int f(int a){int b = a * 2; return b;}"
    assert _one("I", "loop", src) == src


def test_increment_expansion():
    assert _one("I", "increment", "void f(int a){a++; a+=1;}") == "void f(int a){a = a + 1; a = a + 1;}"


def test_if_chain_to_switch():
    src = "int g(int k){if(k==1){return 2;}else if(k==3){return 4;}else{return 5;}}"
    out = _one("I", "if_switch", src)
    assert out.count("case ") == 2 and "default:" in out


def test_conjunction_splits_into_nested_ifs():
    out = _one("I", "nested_if", "void h(int a,int b){if(a>0 && b>0){a=b;}}")
    assert "&&" not in out and out.count("if ") == 2


def test_naming_style_keeps_subtokens():
    src = "void f(){int userDetails=1; userDetails++;}"
    outs = {_one("II", "naming", src, seed=s) for s in range(20)}
    assert "void f(){int user_details=1; user_details++;}" in outs
    for out in outs:
        assert subtokenize(_names(out)[0]) == ["user", "details"]


def test_multi_declaration_split():
    assert _one("II", "multi_decl", "void f(){int i, j; i=1; j=i;}") == "void f(){int i; int j; i=1; j=i;}"


def test_initializer_split():
    assert _one("II", "init_split", "void f(){int i = 3; i++;}") == "void f(){int i; i = 3; i++;}"


def test_temporary_introduced():
    out = _one("II", "temporary", "void f(int a){int b = 0; b = a + 1;}")
    assert _names(out) == ["a", "b", "tmp0"]


def test_type3_full_rename_of_single_variable():
    out = attack_type3(parse_function("void f(){int only = 1; only++;}"), p=1.0)
    assert _names(out.source) == ["var0"]


def test_type3_fraction_is_ceiling():
    src = "void f(int a, int b, int c){int d = a + b + c;}"
    out = apply_attack(src, AttackSpec("III", p=0.25))
    assert sum(n.startswith("var") for n in _names(out)) == 1


def test_spec_validation():
    with pytest.raises(ValueError):
        AttackSpec("IV")
    with pytest.raises(ValueError):
        AttackSpec("III", p=0.0)
    with pytest.raises(ValueError):
        AttackSpec("I", attributes=("naming",))
    assert [a.name for a in standard_attacks()][2:] == [f"type3_rename_{p}" for p in (25, 50, 75, 100)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3000), st.integers(0, 9))
def test_type1_parses_and_keeps_variable_names(seed, aseed):
    src = synthesize(1, seed=seed)[0]["code"]
    out = apply_attack(src, AttackSpec("I", seed=aseed, rate=1.0))
    assert not parse_function(out).has_error
    assert set(_names(out)) == set(_names(src))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3000), st.sampled_from(TYPE2_ATTRIBUTES))
def test_type2_parses_and_keeps_subtokens(seed, attr):
    src = synthesize(1, seed=seed)[0]["code"]
    out = _one("II", attr, src)
    assert not parse_function(out).has_error
    fresh = set(_names(out)) - set(_names(src)) if attr == "temporary" else set()
    assert all(re.fullmatch(r"tmp\d+", n) for n in fresh)
    before = Counter(tuple(subtokenize(n)) for n in _names(src))
    after = Counter(tuple(subtokenize(n)) for n in _names(out) if n not in fresh)
    assert after == before


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 3000), st.sampled_from(["I", "II", "III"]), st.integers(0, 5))
def test_attacks_are_deterministic(seed, kind, aseed):
    src = synthesize(1, seed=seed)[0]["code"]
    spec = AttackSpec(kind, seed=aseed)
    assert apply_attack(src, spec, index=3) == apply_attack(src, spec, index=3)


@pytest.mark.parametrize("attr", TYPE1_ATTRIBUTES + TYPE2_ATTRIBUTES)
def test_each_attribute_is_clean_on_corpus(attr):
    kind = "I" if attr in TYPE1_ATTRIBUTES else "II"
    for rec in synthesize(15, seed=4):
        assert not parse_function(_one(kind, attr, rec["code"])).has_error
