import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from numlab import (Operator, UnsupportedRepresentation, build_space, check_duality_equality_findim,
                    check_sum_formula, index_exact_polytope, index_oracle_2d, index_search_upper,
                    known_index, parse_space_expr, random_symmetric_polygon)
from numlab.numindex import in_index_range, index_ratio, sphere_grid_4d

# Frozen from two independent routes: the exact pair LP and the certified 2-D grid.
POLYGON_INDEX = {2: 1.0, 3: 0.5, 4: 0.41421356237, 5: 0.30901699437, 6: 0.26794919243}


@pytest.mark.parametrize("text, want", [
    ("linf(5)", (1.0, "L/M-space")), ("l1(2)", (1.0, "L/M-space")),
    ("hilbert(3, real)", (0.0, "real Hilbert")), ("hilbert(2, complex)", (0.5, "complex Hilbert")),
    ("polygon(3)", None), ("hexquot", None), ("hilbert(1, real)", None)])
def test_known_index(text, want):
    assert known_index(parse_space_expr(text)) == want


@pytest.mark.parametrize("n", sorted(POLYGON_INDEX))
def test_polygon_exact_and_oracle(n):
    s = build_space(f"polygon({n})")
    exact, W = index_exact_polytope(s)
    orc = index_oracle_2d(s)
    assert abs(exact - POLYGON_INDEX[n]) <= 1e-9
    assert abs(orc.value - exact) <= 1e-9
    assert orc.lower_bound <= exact + 1e-12 <= orc.grid_value + 2e-12
    assert abs(index_ratio(W) - exact) <= 1e-9


def test_polygon_trend():
    vals = [index_oracle_2d(build_space(f"polygon({n})")).value for n in range(2, 7)]
    assert abs(vals[0] - 1) <= 1e-3
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_hexquot_oracle_below_one():
    orc = index_oracle_2d(build_space("hexquot"))
    assert orc.value < 0.8 and orc.points >= 200_000 and orc.grid_bound > 0


def test_oracle_rejects():
    for text in ("linf(3)", "hilbert(2, real)"):
        with pytest.raises(UnsupportedRepresentation):
            index_oracle_2d(build_space(text))
    with pytest.raises(UnsupportedRepresentation):
        index_exact_polytope(build_space("hilbert(2, real)"))


def test_sphere_grid_covering():
    pts, delta = sphere_grid_4d(20_000)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1)
    rng = np.random.default_rng(0)
    probe = rng.standard_normal((500, 4))
    probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    d = np.min(np.linalg.norm(probe[:, None] - pts[None], axis=2), axis=1)
    assert d.max() <= delta


def test_search_real_hilbert():
    est = index_search_upper(build_space("hilbert(2, real)"), starts=32)
    assert est.upper <= 1e-6
    W = est.witness.matrix / np.abs(est.witness.matrix).max()
    assert np.allclose(np.abs(W), [[0, 1], [1, 0]], atol=1e-5) and abs(W[0, 1] + W[1, 0]) < 1e-5


def test_search_complex_hilbert():
    est = index_search_upper(build_space("hilbert(2, complex)"), starts=24)
    assert abs(est.upper - 0.5) <= 5e-3
    assert in_index_range(est.upper, True)


def test_search_linf3_no_operator_below_one():
    est = index_search_upper(build_space("linf(3)"), starts=32)
    assert est.upper >= 1 - 1e-6


@pytest.mark.parametrize("text", ["hexquot", "polygon(5)", "dual(polygon(4))"])
def test_search_agrees_with_oracle(text):
    s = build_space(text)
    est = index_search_upper(s, starts=64)
    orc = index_oracle_2d(s)
    assert est.upper >= orc.value - 2e-2
    assert abs(est.upper - orc.value) <= 2e-2
    assert abs(est.upper - index_ratio(est.witness)) <= 1e-12


def test_search_is_deterministic_and_thread_independent():
    s = build_space("hexquot")
    a = index_search_upper(s, starts=16, budget=200, seed=5)
    b = index_search_upper(s, starts=16, budget=200, seed=5, threads=3)
    assert a.upper == b.upper
    assert np.array_equal(a.witness.matrix, b.witness.matrix)
    assert a.metadata["seed"] == 5 and a.metadata["starts"] == 16


def _signed_permutations(n, rng):
    P = np.eye(n)[rng.permutation(n)]
    return P * rng.choice([-1.0, 1.0], n)


@given(seed=st.integers(0, 2**32 - 1))
def test_isometry_invariance(seed):
    s = build_space("linf(3)")
    rng = np.random.default_rng(seed)
    T = rng.uniform(-1, 1, (3, 3))
    P = _signed_permutations(3, rng)
    a = index_ratio(Operator(T, s))
    b = index_ratio(Operator(P @ T @ P.T, s))
    assert abs(a - b) <= 1e-9


@pytest.mark.parametrize("text", ["linf(2)", "hexquot"])
def test_duality_equality(text):
    rep = check_duality_equality_findim(build_space(text), starts=32)
    assert rep.ok and rep.difference <= 2e-2


def test_duality_random_polygon():
    rep = check_duality_equality_findim(random_symmetric_polygon(4, 11), starts=32)
    assert rep.ok


def test_duality_linf_l1():
    rep = check_duality_equality_findim(build_space("linf(2)"), starts=16)
    assert abs(rep.space.value - 1) <= 1e-3 and abs(rep.dual.value - 1) <= 1e-3


@pytest.mark.parametrize("a, b, mode", [("linf(2)", "linf(2)", "inf"), ("linf(2)", "hexquot", "inf"),
                                        ("hexquot", "hexquot", "one")])
def test_sum_formula(a, b, mode):
    rep = check_sum_formula(build_space(a), build_space(b), mode, starts=32)
    assert rep.ok, rep.discrepancy


@pytest.mark.parametrize("N", [1, 2])
def test_truncation_identity(N):
    n_hex = index_oracle_2d(build_space("hexquot")).value
    est = index_search_upper(build_space(f"xtrunc({N})"), starts=16)
    assert abs(est.upper - n_hex) <= 2e-2


def test_exact_lp_matches_truncation():
    value, _ = index_exact_polytope(build_space("xtrunc(1)"))
    assert abs(value - index_oracle_2d(build_space("hexquot")).value) <= 1e-9


@pytest.mark.parametrize("value, cplx, ok", [(0.0, False, True), (-1e-3, False, False), (1.0, False, True),
                                            (0.36, True, True), (0.3, True, False), (1.1, True, False)])
def test_index_range(value, cplx, ok):
    assert in_index_range(value, cplx) is ok


def test_range_on_random_polygons():
    for seed in range(3):
        s = random_symmetric_polygon(4, seed)
        v = index_oracle_2d(s, density=20_000).value
        assert in_index_range(v, False)
        assert v >= 0.0 and v <= 1 + 1e-6
    assert math.exp(-1) < 0.5
