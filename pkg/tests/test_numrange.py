import numpy as np
import pytest
from hypothesis import given, strategies as st

from numlab import (AlphaSchedule, Operator, UnsupportedRepresentation, adjoint,
                    check_radius_norm_equality, numerical_radius, op_norm, radius_exact_polytope,
                    radius_hilbert, radius_limit_formula, radius_lower_sampling, random_operator)
from numlab.numrange import (Method, complex_field_radius, limit_formula_profile,
                             numerical_range_points)
from numlab.polytope import TAU_GEOM, TAU_PAIR

seeds = st.integers(0, 2**32 - 1)
J = [[0.0, -1.0], [1.0, 0.0]]
SWAP = [[0.0, 1.0], [1.0, 0.0]]


def _witness_ok(T, cert):
    w = cert.witness
    return abs(np.sum(w.f * (T.matrix @ w.x))) >= cert.value - cert.error_bound - TAU_PAIR


def test_exact_examples(spaces):
    c = radius_exact_polytope(Operator.identity(spaces("linf(3)")))
    assert (c.value, c.error_bound, c.method) == (1.0, 0.0, Method.EXACT)
    T = Operator(SWAP, spaces("linf(2)"))
    c = radius_exact_polytope(T)
    assert c.value == 1.0 and _witness_ok(T, c)


def test_exact_nilpotent_cross_check(spaces):
    T = Operator([[0, 1], [0, 0]], spaces("linf(2)"))
    ex = radius_exact_polytope(T)
    lim = radius_limit_formula(T)
    assert abs(ex.value - lim.value) <= lim.error_bound + TAU_GEOM


def test_exact_rejects_oracles(spaces):
    with pytest.raises(UnsupportedRepresentation):
        radius_exact_polytope(Operator(J, spaces("hilbert(2, real)")))
    with pytest.raises(UnsupportedRepresentation):
        radius_hilbert(Operator(J, spaces("linf(2)")))


def test_hilbert_examples(spaces):
    assert radius_hilbert(Operator(J, spaces("hilbert(2, real)"))).value == 0.0
    H = np.array([[2.0, 1 - 1j], [1 + 1j, -3.0]])
    c = radius_hilbert(Operator(H, spaces("hilbert(2, complex)")))
    assert abs(c.value - np.abs(np.linalg.eigvalsh(H)).max()) <= c.error_bound + 1e-12
    N = Operator([[0, 1], [0, 0]], spaces("hilbert(2, complex)"))
    c = radius_hilbert(N)
    assert abs(c.value - 0.5) <= 1e-12 and c.error_bound <= 1e-8
    assert _witness_ok(N, c)


def test_complex_certificate_brackets_fine_grid():
    rng = np.random.default_rng(0)
    for _ in range(5):
        M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        value, upper, _ = complex_field_radius(M)
        th = np.linspace(0, 2 * np.pi, 20001)
        fine = max(np.linalg.eigvalsh(0.5 * (np.exp(1j * t) * M + np.exp(-1j * t) * M.conj().T))[-1]
                   for t in th)
        assert value - 1e-12 <= upper and fine <= upper + 1e-12 and value >= fine - 1e-9


def test_limit_identity(spaces):
    for e in ("linf(2)", "hexquot", "hilbert(2, real)", "hilbert(2, complex)"):
        c = radius_limit_formula(Operator.identity(spaces(e)))
        assert abs(c.value - 1.0) <= c.error_bound + 1e-12


def test_limit_rotation_hilbert(spaces):
    T = Operator(J, spaces("hilbert(2, real)"))
    table, _ = limit_formula_profile(T)
    alphas = AlphaSchedule.default().alphas
    closed = [(np.sqrt(1 + a * a) - 1) / a for a in alphas]
    assert np.allclose(table.max(axis=1), closed, atol=1e-14)
    c = radius_limit_formula(T)
    assert c.value <= c.details["alpha"] / 2 + c.error_bound


def test_schedule_validation():
    with pytest.raises(ValueError):
        AlphaSchedule((0.5, 0.5))
    with pytest.raises(ValueError):
        AlphaSchedule((0.5, -0.1))


def test_sampling_examples(spaces):
    c = radius_lower_sampling(Operator.identity(spaces("hexquot")), samples=1)
    assert abs(c.value - 1) < 1e-12 and c.lower_only and c.upper == np.inf
    c = radius_lower_sampling(Operator(J, spaces("hilbert(2, real)")), samples=500)
    assert c.value <= 1e-12


def test_equality_examples(spaces):
    r = check_radius_norm_equality(Operator.identity(spaces("hexquot")))
    assert r.radius_equals_norm and r.id_norm_equals_one_plus
    r = check_radius_norm_equality(Operator(SWAP, spaces("linf(2)")))
    assert r.radius_equals_norm and r.id_norm_equals_one_plus and abs(r.max_id_norm - 2) < 1e-12
    r = check_radius_norm_equality(Operator(J, spaces("hilbert(2, real)")))
    assert not r.radius_equals_norm and not r.id_norm_equals_one_plus
    assert abs(r.max_id_norm - np.sqrt(2)) < 1e-9


def test_equality_complex(spaces):
    r = check_radius_norm_equality(Operator([[0, 1], [0, 0]], spaces("hilbert(2, complex)")))
    assert r.consistent and not r.radius_equals_norm
    r = check_radius_norm_equality(Operator([[1j, 0], [0, 0.5]], spaces("hilbert(2, complex)")))
    assert r.consistent and r.radius_equals_norm


def test_range_points(spaces):
    assert np.allclose(numerical_range_points(Operator.identity(spaces("polygon(3)"))), 1.0)
    S = np.array([[2.0, 1.0], [1.0, -1.0]])
    pts = numerical_range_points(Operator(S, spaces("hilbert(2, real)")), 300)
    lo, hi = np.linalg.eigvalsh(S)
    assert np.all(pts >= lo - 1e-12) and np.all(pts <= hi + 1e-12)
    pts = numerical_range_points(Operator(SWAP, spaces("linf(2)")))
    assert len(pts) == 8 and np.abs(pts).max() == 1.0


def test_auto_dispatch(spaces):
    assert numerical_radius(Operator(SWAP, spaces("linf(2)"))).method is Method.EXACT
    assert numerical_radius(Operator(J, spaces("hilbert(2, real)"))).method is Method.HILBERT
    c = numerical_radius(Operator(SWAP, spaces("lp(2, 3)")))
    assert c.method is Method.LIMIT and c.details["consistent"]
    with pytest.raises(ValueError):
        numerical_radius(Operator(SWAP, spaces("linf(2)")), "bogus")


@pytest.mark.parametrize("expr", ["linf(2)", "l1(3)", "hexquot", "polygon(5)", "xtrunc(1)",
                                  "sum_1(hexquot, linf(2))"])
@given(seed=seeds)
def test_sandwich_polytopes(spaces, expr, seed):
    T = random_operator(spaces(expr), seed)
    ex = radius_exact_polytope(T)
    lo = radius_lower_sampling(T, samples=200, seed=seed)
    lim = radius_limit_formula(T)
    assert lo.value <= ex.value + TAU_PAIR
    assert ex.value <= lim.upper + TAU_GEOM
    assert abs(lim.value - ex.value) <= 1e-6
    assert _witness_ok(T, ex) and _witness_ok(T, lo)


@pytest.mark.parametrize("expr", ["hilbert(2, real)", "hilbert(3, real)", "hilbert(2, complex)"])
@given(seed=seeds)
def test_hilbert_vs_limit(spaces, expr, seed):
    T = random_operator(spaces(expr), seed)
    h = radius_hilbert(T)
    lim = radius_limit_formula(T)
    lo = radius_lower_sampling(T, samples=200, seed=seed)
    assert abs(h.value - lim.value) <= h.error_bound + lim.error_bound + 1e-9
    assert lo.value <= h.upper + TAU_PAIR


@pytest.mark.parametrize("expr", ["linf(3)", "l1(3)", "hexquot", "polygon(4)"])
@given(seed=seeds)
def test_adjoint_radius(spaces, expr, seed):
    T = random_operator(spaces(expr), seed)
    assert abs(radius_exact_polytope(T).value - radius_exact_polytope(adjoint(T)).value) <= 1e-9


@given(seed=seeds, c=st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3))
def test_radius_homogeneity_and_norm_bound(spaces, seed, c):
    for expr in ("hexquot", "hilbert(2, complex)"):
        T = random_operator(spaces(expr), seed)
        a, b = numerical_radius(T), numerical_radius(T.scaled(c))
        assert abs(b.value - abs(c) * a.value) <= b.error_bound + abs(c) * a.error_bound + 1e-9
        n, err = op_norm(T)
        assert a.value <= n + err + a.error_bound + 1e-12


@given(seed=seeds)
def test_limit_monotone_in_alpha(spaces, seed):
    for expr in ("hexquot", "hilbert(2, complex)"):
        table, _ = limit_formula_profile(random_operator(spaces(expr), seed), AlphaSchedule(
            tuple(2.0 ** -k for k in range(1, 25)), omega_grid=64))
        assert np.all(np.diff(table, axis=0) <= 1e-12)


@given(seed=seeds)
def test_equality_criterion_consistent(spaces, seed):
    for expr in ("linf(2)", "hexquot", "hilbert(2, real)"):
        assert check_radius_norm_equality(random_operator(spaces(expr), seed)).consistent


def test_identity_radius_polytopes(spaces):
    for expr in ("linf(3)", "hexquot", "polygon(6)", "xtrunc(1)"):
        assert radius_exact_polytope(Operator.identity(spaces(expr))).value == pytest.approx(1.0, abs=1e-15)
