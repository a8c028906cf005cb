"""Builders turning a :data:`~numlab.expr.SpaceExpr` into a :class:`Space`.

Kernels of polytope spaces are materialized as exact sections while their
dimension is at most :data:`SECTION_MAX_DIM`; larger ones become subspace
oracles over the ambient facet list.  The truncations ``xtrunc(N)`` model
``c`` by ``ℓ∞^{N+1}`` with the limit as an explicit last coordinate.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import expr as E
from .errors import InputError, UnsupportedRepresentation
from .expr import parse_space_expr, validate_expr
from .polytope import ExactPolytope, hull_of_symmetric
from .spaces import (FieldTag, Space, _polytope_subspace_oracle, dual_space,
                     hilbert_oracle, lp_oracle, subspace_oracle, sum_oracle)

SECTION_MAX_DIM = 8
SUM_MAX_DIM = 6
CUBE_MAX_DIM = 12

__all__ = [
    "build_space", "parse_space_expr", "section_vertices", "kernel_basis",
    "linf_facets", "polygon_polytope", "random_symmetric_polygon",
    "truncation_split", "check_msummand_split", "direct_sum",
]


def linf_facets(n):
    eye = np.eye(n)
    return np.vstack([eye, -eye])


def _linf(n):
    verts = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    return ExactPolytope(verts, linf_facets(n))


def _l1(n):
    return _linf(n).polar()


def polygon_polytope(n):
    """Regular ``2n``-gon through the ``2n``-th roots of unity."""
    k = np.arange(n)
    half = np.column_stack([np.cos(k * np.pi / n), np.sin(k * np.pi / n)])
    mid = (k + 0.5) * np.pi / n
    fhalf = np.column_stack([np.cos(mid), np.sin(mid)]) / np.cos(np.pi / (2 * n))
    return ExactPolytope(np.vstack([half, -half]), np.vstack([fhalf, -fhalf]))


def random_symmetric_polygon(k, seed):
    """Space whose ball is ``conv(±p_i)`` for ``k`` seeded random points."""
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, np.pi, k))
    rad = rng.uniform(0.5, 1.5, k)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return Space(FieldTag.REAL, 2, ExactPolytope.from_vertices(pts), None)


def kernel_basis(functionals, n=None, tol=1e-12):
    """Basis (as columns) of ``{x : f(x) = 0 for all f}``.

    Gauss-Jordan elimination pivoting on the largest entry, ties broken
    toward the last column, so ``a + b + c = 0`` gets the basis
    ``(1,0,-1), (0,1,-1)``.
    """
    A = np.atleast_2d(np.asarray(functionals, dtype=float)).copy()
    n = A.shape[1] if n is None else n
    pivots = []
    row = 0
    for _ in range(A.shape[0]):
        if row >= A.shape[0]:
            break
        free = [j for j in range(n) if j not in pivots]
        mags = np.abs(A[row, free])
        if mags.size == 0 or mags.max() <= tol:
            A = np.delete(A, row, axis=0)
            continue
        best = mags.max()
        j = [c for c, m in zip(free, mags) if m >= best - tol][-1]
        A[row] /= A[row, j]
        for r in range(A.shape[0]):
            if r != row:
                A[r] -= A[r, j] * A[row]
        pivots.append(j)
        row += 1
    free = [j for j in range(n) if j not in pivots]
    B = np.zeros((n, len(free)))
    for col, j in enumerate(free):
        B[j, col] = 1.0
        for r, p in enumerate(pivots):
            B[p, col] = -A[r, j]
    return B


def section_vertices(ambient, basis):
    """Vertices, in subspace coordinates, of the ball section by ``span(basis)``."""
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[1] > SECTION_MAX_DIM:
        raise UnsupportedRepresentation(
            f"exact sections limited to dimension {SECTION_MAX_DIM}, got {B.shape[1]}")
    facets = _facets_of(ambient)
    G = facets @ B
    G = G[np.max(np.abs(G), axis=1) > 1e-14]
    _, verts = hull_of_symmetric(G)
    return verts


def _facets_of(ambient):
    if isinstance(ambient, ExactPolytope):
        return ambient.facets
    if isinstance(ambient, Space) and ambient.is_polytope:
        return ambient.rep.facets
    return np.asarray(ambient, dtype=float)


def _kernel_space(ambient, functionals, expr):
    """Kernel subspace of ``ambient`` (a :class:`Space` or a facet array)."""
    A = np.atleast_2d(np.asarray(functionals, dtype=float))
    n = A.shape[1]
    B = kernel_basis(A, n)
    if B.shape[1] == 0:
        raise InputError("kernel is the zero subspace")
    if isinstance(ambient, Space) and not ambient.is_polytope:
        return Space(ambient.field, B.shape[1], subspace_oracle(ambient, B), expr, B)
    facets = _facets_of(ambient)
    if B.shape[1] <= SECTION_MAX_DIM:
        G = facets @ B
        G = G[np.max(np.abs(G), axis=1) > 1e-14]
        f, v = hull_of_symmetric(G)
        return Space(FieldTag.REAL, B.shape[1], ExactPolytope(v, f), expr, B)
    return Space(FieldTag.REAL, B.shape[1], _polytope_subspace_oracle(facets, B), expr, B)


def _truncation_functional(N, which):
    """Ambient order ``x(1..N), x(∞), y(1..N), y(∞), z(1..N), z(∞)``."""
    f = np.zeros(3 * (N + 1))
    idx = N if which == "x" else 0
    for block in range(3):
        f[block * (N + 1) + idx] = 1.0
    return f


def _same_field(a, b):
    if a.field is not b.field:
        raise InputError("direct sums need operands over the same field")
    return a.field


def _product(a, b, kind):
    P, Q = a.rep, b.rep
    if kind == "one":
        return _product(Space(a.field, a.dim, P.polar()), Space(b.field, b.dim, Q.polar()), "inf").polar()
    verts = np.array([np.concatenate([v, w]) for v in P.vertices for w in Q.vertices])
    facets = np.vstack([
        np.hstack([P.facets, np.zeros((len(P.facets), b.dim))]),
        np.hstack([np.zeros((len(Q.facets), a.dim)), Q.facets]),
    ])
    return ExactPolytope(verts, facets)


def build_space(e):
    """Materialize an expression (or its text form) as a :class:`Space`."""
    if isinstance(e, str):
        e = parse_space_expr(e)
    validate_expr(e)
    if isinstance(e, E.Linf):
        if e.n <= CUBE_MAX_DIM:
            return Space(FieldTag.REAL, e.n, _linf(e.n), e)
        return Space(FieldTag.REAL, e.n, lp_oracle(e.n, np.inf), e)
    if isinstance(e, E.L1):
        if e.n <= CUBE_MAX_DIM:
            return Space(FieldTag.REAL, e.n, _l1(e.n), e)
        return Space(FieldTag.REAL, e.n, lp_oracle(e.n, 1.0), e)
    if isinstance(e, E.Lp):
        return Space(FieldTag.REAL, e.n, lp_oracle(e.n, e.p), e)
    if isinstance(e, E.Hilbert):
        return Space(FieldTag(e.field), e.n, hilbert_oracle(), e)
    if isinstance(e, E.Polygon):
        return Space(FieldTag.REAL, 2, polygon_polytope(e.n), e)
    if isinstance(e, E.HexQuot):
        return _kernel_space(linf_facets(3), [[1.0, 1.0, 1.0]], e)
    if isinstance(e, (E.SumInf, E.Sum1)):
        kind = "inf" if isinstance(e, E.SumInf) else "one"
        return direct_sum(build_space(e.left), build_space(e.right), kind)
    if isinstance(e, E.Dual):
        inner = build_space(e.inner)
        return dual_space(inner)
    if isinstance(e, E.Ker):
        amb = build_space(e.inner)
        if len(e.functionals[0]) != amb.dim:
            raise InputError(f"ker functionals have length {len(e.functionals[0])}, space has dim {amb.dim}")
        return _kernel_space(amb, e.functionals, e)
    if isinstance(e, (E.XTrunc, E.X2Trunc)):
        which = "x" if isinstance(e, E.XTrunc) else "first"
        f = _truncation_functional(e.n, which)
        return _kernel_space(linf_facets(len(f)), [f], e)
    raise InputError(f"unknown expression {e!r}")


def direct_sum(a, b, kind="inf"):
    """``a ⊕∞ b`` (``kind="inf"``) or ``a ⊕1 b`` (``kind="one"``) of built spaces."""
    if kind not in ("inf", "one"):
        raise InputError(f"unknown sum kind {kind!r}")
    fld = _same_field(a, b)
    e = None
    if a.expr is not None and b.expr is not None:
        e = (E.SumInf if kind == "inf" else E.Sum1)(a.expr, b.expr)
    if a.is_polytope and b.is_polytope and a.dim + b.dim <= SUM_MAX_DIM:
        return Space(fld, a.dim + b.dim, _product(a, b, kind), e)
    return Space(fld, a.dim + b.dim, sum_oracle(a, b, kind), e)


def truncation_split(N, which="x"):
    """Coordinate permutation exhibiting ``xtrunc(N) = ℓ∞^{3N} ⊕∞ hexquot``.

    Returns ``perm`` such that ``x[perm]`` lists the ``3N`` finite
    coordinates first and the two hexagon coordinates last.
    """
    f = _truncation_functional(N, which)
    B = kernel_basis([f])
    support = set(np.flatnonzero(f))
    free_ambient = [int(np.flatnonzero(B[:, c])[0]) for c in range(B.shape[1])]
    cube = [c for c, j in enumerate(free_ambient) if j not in support]
    hexa = [c for c, j in enumerate(free_ambient) if j in support]
    return np.array(cube + hexa)


def check_msummand_split(N, which="x", samples=500, seed=0):
    """Largest norm discrepancy between the truncation and ``sum_inf(linf(3N), hexquot)``."""
    space = build_space(E.XTrunc(N) if which == "x" else E.X2Trunc(N))
    ref = build_space(E.SumInf(E.Linf(3 * N), E.HexQuot()))
    perm = truncation_split(N, which)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in rng.standard_normal((samples, space.dim)):
        worst = max(worst, abs(space.norm(x) - ref.norm(x[perm])))
    return worst
