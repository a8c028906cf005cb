import pytest
from hypothesis import given, strategies as st

from numlab import ParseError, SemanticError, parse_space_expr
from numlab import expr as E

leaf = st.one_of(
    st.integers(1, 9).map(E.Linf),
    st.integers(1, 9).map(E.L1),
    st.builds(E.Lp, st.integers(1, 5), st.sampled_from([1.0, 1.5, 2.0, 3.0, float("inf")])),
    st.builds(E.Hilbert, st.integers(1, 4), st.sampled_from(["real", "complex"])),
    st.integers(2, 8).map(E.Polygon),
    st.just(E.HexQuot()),
    st.integers(1, 3).map(E.XTrunc),
    st.integers(1, 3).map(E.X2Trunc),
)


def _ker(inner):
    return st.lists(st.floats(-3, 3, allow_nan=False).map(lambda x: round(x, 3)),
                    min_size=3, max_size=3).map(lambda v: E.Ker(inner, (tuple(v),)))


exprs = st.recursive(leaf, lambda c: st.one_of(
    st.builds(E.SumInf, c, c), st.builds(E.Sum1, c, c), c.map(E.Dual), c.flatmap(_ker)),
    max_leaves=5)


@given(exprs)
def test_roundtrip(e):
    assert parse_space_expr(str(e)) == e


def test_whitespace_ignored():
    a = parse_space_expr("sum_inf( linf(2) ,  hexquot )")
    assert a == E.SumInf(E.Linf(2), E.HexQuot())


def test_ker_vectors():
    e = parse_space_expr("ker(linf(3); [1, 1, 1])")
    assert e == E.Ker(E.Linf(3), ((1.0, 1.0, 1.0),))
    assert str(e) == "ker(linf(3); [1, 1, 1])"


@pytest.mark.parametrize("text, offset", [
    ("linf(2", 6),
    ("foo(2)", 0),
    ("sum_inf(linf(2) hexquot)", 16),
    ("hexquot extra", 8),
])
def test_parse_error_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse_space_expr(text)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


@pytest.mark.parametrize("text", ["linf(0)", "lp(2, 0.5)", "polygon(1)", "xtrunc(0)",
                                  "ker(linf(3); [1, 1, 1], [1, 1])"])
def test_semantic_errors(text):
    with pytest.raises(SemanticError):
        parse_space_expr(text)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        parse_space_expr("linf(")
