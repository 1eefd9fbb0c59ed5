import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicpref import grayenum
from cubicpref.construct import (
    ConstructionError,
    StackSpec,
    WeaveSpec,
    detect_stack_column,
    detect_weave_column,
    make_stack_partner,
    predicted_stack_character,
    predicted_weave_character,
    stack,
    stackable,
    synthesize,
    synthesize_trace,
    unstack,
    unweave,
    weave,
    weave_column,
)
from cubicpref.prefcore import (
    Character,
    QuestionSet,
    character,
    character_by_definition,
    is_cubic,
    restrict,
)

from matrices import (
    B,
    STACK_P1,
    STACK_P2,
    STACKED,
    SYNTH_TARGET,
    WEAVE_P1,
    WOVEN,
    all_cubic,
)


def partners(a):
    """Every cubic matrix stackable under ``a``, n <= 3."""
    return [b for b in all_cubic(a.n) if b.rows[0] == a.rows[-1]]


# --------------------------------------------------------------- examples

def test_stack_example():
    assert stackable(STACK_P1, STACK_P2)
    assert not stackable(STACK_P1, STACK_P1)
    p = stack(STACK_P1, STACK_P2, StackSpec(2, 1))
    assert p.to_text() == STACKED.to_text()
    assert detect_stack_column(p) == (2, 1)
    assert unstack(p, 2, 1) == (STACK_P1, STACK_P2)


def test_stack_character_example():
    c1 = Character.of(2, [[1]])
    c2 = Character.of(2, [[2]])
    assert predicted_stack_character(c1, c2, 2) == Character.of(3, [[2]])
    assert character_by_definition(STACKED) == Character.of(3, [[2]])
    k = 3
    triv = Character.trivial(3)
    assert predicted_stack_character(triv, triv, k) == Character.of(4, [[k]])


def test_make_stack_partner_example():
    b = make_stack_partner(STACK_P1)
    assert b.row_strings() == ["10", "11", "01", "00"]
    assert stackable(STACK_P1, b)
    assert character(b) == character(STACK_P1)


def test_weave_example():
    p = weave(WEAVE_P1, WeaveSpec(3, 0))
    assert p.to_text() == WOVEN.to_text()
    assert p.column(3) == (0, 1, 1, 0, 0, 1, 1, 0)
    assert detect_weave_column(p) == (3, 0)
    assert unweave(p, 3, 0) == WEAVE_P1
    assert character(p) == Character.of(3, [[1], [1, 2]])
    assert predicted_weave_character(Character.of(2, [[1]]), 3) == Character.of(3, [[1], [1, 2]])


def test_weave_column_pattern():
    assert weave_column(8, 1) == (1, 0, 0, 1, 1, 0, 0, 1)
    assert weave_column(8, 0) == (0, 1, 1, 0, 0, 1, 1, 0)


def test_detect_on_nonseparable_b():
    assert detect_stack_column(B) is None
    assert detect_weave_column(B) is None


def test_weave_column_is_not_a_stack_column():
    # {1} comes from the input, so column 1 is a stack column; the woven one is not
    assert detect_stack_column(WOVEN) == (1, 0)
    with pytest.raises(ConstructionError):
        unstack(WOVEN, 3, 0)
    with pytest.raises(ConstructionError):
        unweave(STACKED, 2, 1)


def test_bad_specs():
    with pytest.raises(ValueError):
        StackSpec(1, 2)
    with pytest.raises(ValueError):
        weave(WEAVE_P1, WeaveSpec(4, 1))
    with pytest.raises(ConstructionError):
        stack(STACK_P1, STACK_P1, StackSpec(1, 1))


def test_weave_restrictions_recover_input():
    for k in (1, 2, 3):
        for sign in (0, 1):
            p = weave(WEAVE_P1, WeaveSpec(k, sign))
            for z in (0, 1):
                r = restrict(p, QuestionSet.of(3, [k]), QuestionSet.of(3, [k]).mask * z)
                assert r == WEAVE_P1


# ----------------------------------------------------- laws, exhaustively

def test_stack_law_exhaustive_small():
    for n in (1, 2, 3):
        for a in all_cubic(n):
            for b in partners(a):
                ca, cb = character(a), character(b)
                for k in range(1, n + 2):
                    for sign in (0, 1):
                        p = stack(a, b, StackSpec(k, sign))
                        assert is_cubic(p)
                        assert character(p) == predicted_stack_character(ca, cb, k)
                        assert unstack(p, k, sign) == (a, b)


def test_weave_law_exhaustive_small():
    for n in (1, 2, 3):
        for a in all_cubic(n):
            ca = character(a)
            for k in range(1, n + 2):
                for sign in (0, 1):
                    p = weave(a, WeaveSpec(k, sign))
                    assert is_cubic(p)
                    assert character(p) == predicted_weave_character(ca, k)
                    assert unweave(p, k, sign) == a


def check_column_equivalences(p):
    n = p.n
    c = set(character(p).masks)
    singles = [k for k in range(1, n + 1) if QuestionSet.of(n, [k]).mask in c]
    cosingles = [k for k in range(1, n + 1) if QuestionSet.of(n, [k]).complement().mask in c]
    s, w = detect_stack_column(p), detect_weave_column(p)
    assert len(singles) <= 1 and len(cosingles) <= 1
    assert (s[0] if s else None) == (singles[0] if singles else None)
    assert (w[0] if w else None) == (cosingles[0] if cosingles else None)


def test_column_equivalences_exhaustive():
    for n in (2, 3):
        for p in all_cubic(n):
            check_column_equivalences(p)
    grayenum.enumerate_all_paths(4, check_column_equivalences)


# ---------------------------------------------------------- laws, random

@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**32), data=st.data())
def test_stack_law_random(n, seed, data):
    a = grayenum.random_cubic(n, seed)
    b = make_stack_partner(grayenum.random_cubic(n, seed + 1))
    # put b's first row on a's last row by flipping columns
    b = b.flip_columns(b.rows[0] ^ a.rows[-1])
    k = data.draw(st.integers(1, n + 1))
    sign = data.draw(st.integers(0, 1))
    p = stack(a, b, StackSpec(k, sign))
    assert is_cubic(p)
    assert character(p) == predicted_stack_character(character(a), character(b), k)
    assert detect_stack_column(p) == (k, sign) or n == 1
    assert stack(*unstack(p, k, sign), StackSpec(k, sign)) == p


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**32), data=st.data())
def test_weave_law_random(n, seed, data):
    a = grayenum.random_cubic(n, seed)
    k = data.draw(st.integers(1, n + 1))
    sign = data.draw(st.integers(0, 1))
    p = weave(a, WeaveSpec(k, sign))
    assert is_cubic(p)
    assert character(p) == predicted_weave_character(character(a), k)
    assert detect_weave_column(p) == (k, sign)
    assert weave(unweave(p, k, sign), WeaveSpec(k, sign)) == p


# ------------------------------------------------------------- synthesis

def test_synthesize_worked_example():
    c = Character.of(7, SYNTH_TARGET)
    result = synthesize_trace(c)
    assert result.ok
    p = result.matrix
    assert len(p.rows) == 128 and is_cubic(p)
    assert character_by_definition(p) == c
    ops = [(s["op"], s["k"]) for s in result.steps]
    assert ops == [("stack", 5), ("weave", 1), ("weave", 5)]
    js = result.to_json()
    assert js["status"] == "admissible" and len(js["base"]) == 16


def test_synthesize_rejects_non_nested():
    result = synthesize_trace(Character.of(3, [[1], [2]]))
    assert not result.ok and result.proved_inadmissible
    assert synthesize(Character.of(3, [[1], [2]])) is None


@pytest.mark.parametrize("sets", [[[2]], [[3], [1, 3], [1, 3, 4]], [[1, 2, 4]]])
def test_synthesize_small_uses_lookup(sets):
    c = Character.of(4, sets)
    p = synthesize(c)
    assert p is not None and character(p) == c


def test_synthesize_nested_but_absent_base():
    # {a,b} at n=3 is nested yet no cubic matrix has it
    result = synthesize_trace(Character.of(3, [[1, 2]]))
    assert not result.ok and result.proved_inadmissible
    assert result.to_json()["status"] == "not found"


def test_synthesize_not_found_is_not_a_proof():
    # peeling reaches a 5-question base with no match under the default base size
    c = Character.of(6, [[1, 2]])
    result = synthesize_trace(c)
    assert not result.ok
    assert not result.proved_inadmissible


def test_synthesize_random_targets():
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(2, 6)
        c = character(grayenum.random_cubic(n, rng.randrange(10**9)))
        p = synthesize(c)
        if p is not None:
            assert character(p) == c and is_cubic(p)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**32), data=st.data())
def test_sign_invariance(n, seed, data):
    a = grayenum.random_cubic(n, seed)
    b = make_stack_partner(a)
    k = data.draw(st.integers(1, n + 1))
    assert character(stack(a, b, StackSpec(k, 0))) == character(stack(a, b, StackSpec(k, 1)))
    assert character(weave(a, WeaveSpec(k, 0))) == character(weave(a, WeaveSpec(k, 1)))


@settings(max_examples=150, deadline=None)
@given(n=st.integers(2, 3), seed=st.integers(0, 2**32), data=st.data())
def test_laws_against_definitional_oracle(n, seed, data):
    a = grayenum.random_cubic(n, seed)
    b = grayenum.random_cubic(n, seed ^ 0x5A5A)
    b = b.flip_columns(b.rows[0] ^ a.rows[-1])
    k = data.draw(st.integers(1, n + 1))
    sign = data.draw(st.integers(0, 1))
    ca, cb = character_by_definition(a), character_by_definition(b)
    assert character_by_definition(stack(a, b, StackSpec(k, sign))) == predicted_stack_character(ca, cb, k)
    assert character_by_definition(weave(a, WeaveSpec(k, sign))) == predicted_weave_character(ca, k)


def test_synthesize_power_set_absent():
    result = synthesize_trace(Character.power_set(2))
    assert not result.ok and result.proved_inadmissible


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_synthesize_trivial_character(n):
    p = synthesize(Character.trivial(n))
    if n == 2:
        # every 2-question cubic matrix has class {a}
        assert p is None
    else:
        assert p is not None and character(p) == Character.trivial(n)
