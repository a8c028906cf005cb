"""Numerical index estimation.

``n(X) = inf v(T)/||T||``.  The search gives upper bounds with witnesses; on
real polytope spaces the infimum is also available exactly as a finite
family of linear programs (one per norming facet/vertex pair), and in two
dimensions a certified grid over the unit sphere of matrices gives a lower
bound as well.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull

from . import expr as E
from .errors import UnsupportedRepresentation
from .numrange import complex_field_radius, numerical_radius
from .operators import Operator, op_norm
from .spaces import dual_space

DEFAULT_DENSITY = 200_000
TIE_TOL = 1e-12
INDEX_TOL = 2e-2
RANGE_TOL = 1e-6


@dataclass(frozen=True)
class IndexEstimate:
    """Upper bound ``upper`` on ``n(X)``, attained by ``witness``."""

    upper: float
    witness: Operator
    oracle_value: Optional[float] = None
    known_value: Optional[tuple] = None
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def value(self):
        """Best available estimate: the oracle when present, else the search bound."""
        return self.oracle_value if self.oracle_value is not None else self.upper


# ------------------------------------------------------------ objectives

def _polytope_objective(space):
    P = np.asarray(space.rep.pair_tensor)
    Q = np.asarray(space.rep.norm_tensor)

    def f(t):
        n = np.max(Q @ t)
        if not n > 0:
            return np.inf
        return float(np.max(np.abs(P @ t)) / n)
    return f


def _hilbert_objective(space):
    d = space.dim
    if not space.is_complex and d == 2:
        def f2(t):
            a, b, c, e = t
            fro, det = a * a + b * b + c * c + e * e, a * e - b * c
            n = math.sqrt(0.5 * (fro + math.sqrt(max(fro * fro - 4 * det * det, 0.0))))
            if not n > 0:
                return np.inf
            m = 0.5 * (b + c)
            r = abs(0.5 * (a + e)) + math.sqrt(0.25 * (a - e) ** 2 + m * m)
            return r / n
        return f2
    if not space.is_complex:
        def f(t):
            M = t.reshape(d, d)
            n = np.linalg.norm(M, 2)
            if not n > 0:
                return np.inf
            return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (M + M.T)))) / n)
        return f

    def g(t):
        M = (t[: d * d] + 1j * t[d * d:]).reshape(d, d)
        n = np.linalg.norm(M, 2)
        if not n > 0:
            return np.inf
        return complex_field_radius(M, grid=360, refine=False)[0] / n
    return g


def _generic_objective(space):
    def f(t):
        T = _to_operator(t, space)
        n = T.norm
        if not n > 0:
            return np.inf
        return numerical_radius(T).value / n
    return f


def _objective(space):
    if space.is_polytope:
        return _polytope_objective(space)
    if space.rep.family == "Hilbert":
        return _hilbert_objective(space)
    return _generic_objective(space)


def _nparams(space):
    return (2 if space.is_complex else 1) * space.dim ** 2


def _to_matrix(t, space):
    d = space.dim
    if space.is_complex:
        return (t[: d * d] + 1j * t[d * d:]).reshape(d, d)
    return np.asarray(t, dtype=float).reshape(d, d)


def _to_operator(t, space):
    return Operator(_to_matrix(t, space), space)


def index_ratio(T):
    """``v(T)/||T||`` with the full radius and norm engines."""
    n, _ = op_norm(T)
    return numerical_radius(T).value / n


# ----------------------------------------------------------- exact LPs

def _pair_lp(P, Q, q0):
    """``min s`` over ``t`` with ``|P t| <= s``, ``Q t <= 1``, ``q0 t = 1``."""
    d = P.shape[1]
    one = np.ones((len(P), 1))
    A = np.vstack([np.hstack([P, -one]), np.hstack([-P, -one]),
                   np.hstack([Q, np.zeros((len(Q), 1))])])
    b = np.concatenate([np.zeros(2 * len(P)), np.ones(len(Q))])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=A, b_ub=b, A_eq=np.append(q0, 0.0)[None], b_eq=[1.0],
                  bounds=[(None, None)] * (d + 1), method="highs")
    if res.status != 0:
        return np.inf, None
    return float(res.fun), res.x[:d]


def index_exact_polytope(space):
    """Exact ``n(X)`` of a real polytope space.

    Every norm-one ``T`` attains its norm at some facet/vertex pair
    ``(g0, v0)``; for fixed pair the minimal radius is a linear program.
    Returns ``(value, witness Operator)``.
    """
    if not space.is_polytope or space.is_complex:
        raise UnsupportedRepresentation("exact index needs a real polytope space")
    P = np.asarray(space.rep.pair_tensor)
    Q = np.asarray(space.rep.norm_tensor)
    rows = np.unique(np.round(Q, 12), axis=0, return_index=True)[1]
    best, arg = np.inf, None
    for i in sorted(rows):
        val, t = _pair_lp(P, Q, Q[i])
        if val < best - TIE_TOL:
            best, arg = val, t
    return best, _to_operator(arg, space)


def _polish(space, t):
    """Re-solve at the active norming pair of ``t``; never worsens the ratio."""
    P = np.asarray(space.rep.pair_tensor)
    Q = np.asarray(space.rep.norm_tensor)
    i = int(np.argmax(Q @ t))
    val, x = _pair_lp(P, Q, Q[i])
    return (val, x) if x is not None else (np.inf, t)


# -------------------------------------------------------------- search

def default_budget(space):
    return (256, 500) if space.dim <= 3 else (64, 300)


def _canonical(t, space):
    """Scale to operator norm one with a fixed sign for deterministic ties."""
    M = _to_matrix(t, space)
    n = Operator(M, space).norm
    M = M / n
    flat = np.concatenate([M.real.ravel(), M.imag.ravel()]) if space.is_complex else M.ravel()
    nz = flat[np.abs(flat) > 1e-12]
    if not space.is_complex and nz.size and nz[0] < 0:
        flat = -flat
    return flat


def _run_start(f, space, child, budget, polish):
    rng = np.random.default_rng(child)
    t0 = rng.uniform(-1.0, 1.0, _nparams(space))
    res = minimize(f, t0, method="Nelder-Mead",
                   options={"maxfev": budget, "xatol": 1e-10, "fatol": 1e-13,
                            "adaptive": len(t0) > 8})
    t, val = res.x, float(res.fun)
    if polish and space.is_polytope and not space.is_complex:
        pv, pt = _polish(space, t)
        if pv < val:
            t, val = pt, pv
    return val, t


def index_search_upper(space, starts=None, budget=None, seed=0, threads=1, polish=True):
    """Multi-start Nelder-Mead on ``v(T)/||T||`` over raw matrix entries."""
    ds, db = default_budget(space)
    starts = ds if starts is None else int(starts)
    budget = db if budget is None else int(budget)
    f = _objective(space)
    children = np.random.SeedSequence(seed).spawn(starts)
    run = lambda c: _run_start(f, space, c, budget, polish)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(c) for c in children]
    best = min(v for v, _ in results)
    ties = [_canonical(t, space) for v, t in results if v <= best + TIE_TOL]
    t = min(ties, key=tuple)
    W = _to_operator(t, space)
    upper = index_ratio(W)
    return IndexEstimate(upper, W, known_value=known_index(space.expr),
                         metadata={"starts": starts, "budget": budget, "seed": seed,
                                   "search_value": best, "polish": polish})


# --------------------------------------------------------- 2-D oracle

@dataclass(frozen=True)
class OracleResult:
    value: float
    grid_value: float
    grid_bound: float
    points: int
    witness: Operator

    @property
    def lower_bound(self):
        """Certified: the objective is Lipschitz on the sphere of matrices."""
        return self.grid_value - self.grid_bound

    def __float__(self):
        return float(self.value)


def sphere_grid_4d(density):
    """Radially projected lattice on the surface of ``[-1, 1]^4``.

    Returns ``(points, covering_radius)``; every unit vector is within
    ``covering_radius`` of some point (radial projection is 1-Lipschitz
    outside the unit ball).
    """
    k = 2
    while k ** 4 - (k - 2) ** 4 < density:
        k += 1
    h = 2.0 / (k - 1)
    ax = np.linspace(-1.0, 1.0, k)
    face = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    pts = []
    for axis in range(4):
        for sign in (1.0, -1.0):
            p = np.insert(face, axis, sign, axis=1)
            pts.append(p)
    pts = np.unique(np.vstack(pts), axis=0)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts, h * math.sqrt(3) / 2


def _inradius(rows):
    hull = ConvexHull(rows)
    return float(np.min(-hull.equations[:, -1]))


def index_oracle_2d(space, density=DEFAULT_DENSITY, refine_starts=8):
    """Exhaustive grid plus local refinement on a 2-D real polytope space."""
    if space.dim != 2 or space.is_complex or not space.is_polytope:
        raise UnsupportedRepresentation("the 2-D oracle needs a real 2-D polytope space")
    P = np.asarray(space.rep.pair_tensor)
    Q = np.asarray(space.rep.norm_tensor)
    pts, delta = sphere_grid_4d(density)
    vals = np.empty(len(pts))
    for lo in range(0, len(pts), 50_000):
        chunk = pts[lo: lo + 50_000].T
        vals[lo: lo + 50_000] = np.max(np.abs(P @ chunk), axis=0) / np.max(Q @ chunk, axis=0)
    cv = float(np.max(np.linalg.norm(P, axis=1)))
    cn = float(np.max(np.linalg.norm(Q, axis=1)))
    bound = (cv + cn) / _inradius(Q) * delta
    order = np.lexsort((*pts.T[::-1], vals))
    grid_value = float(vals[order[0]])
    f = _polytope_objective(space)
    best, arg = grid_value, pts[order[0]]
    for i in order[:refine_starts]:
        res = minimize(f, pts[i], method="Nelder-Mead",
                       options={"maxfev": 2000, "xatol": 1e-12, "fatol": 1e-14})
        val, t = float(res.fun), res.x
        pv, pt = _polish(space, t)
        if pv < val:
            val, t = pv, pt
        if val < best - TIE_TOL:
            best, arg = val, t
    return OracleResult(best, grid_value, bound, len(pts), _to_operator(arg, space))


# --------------------------------------------------------- known values

def known_index(e):
    """Textbook values: ``1`` for ``ℓ∞``/``ℓ1``, Hilbert ``0`` (real) or ``1/2`` (complex)."""
    if isinstance(e, (E.Linf, E.L1)):
        return (1.0, "L/M-space")
    if isinstance(e, E.Lp) and (math.isinf(e.p) or e.p == 1.0):
        return (1.0, "L/M-space")
    if isinstance(e, E.Hilbert) and e.n >= 2:
        return (0.0, "real Hilbert") if e.field == "real" else (0.5, "complex Hilbert")
    return None


# --------------------------------------------------------------- reports

def estimate_index(space, starts=None, budget=None, seed=0, threads=1, oracle=None):
    """Search upper bound plus the 2-D oracle whenever it applies."""
    est = index_search_upper(space, starts, budget, seed, threads)
    use_oracle = oracle if oracle is not None else (
        space.dim == 2 and space.is_polytope and not space.is_complex)
    if use_oracle:
        orc = index_oracle_2d(space)
        meta = dict(est.metadata, grid_value=orc.grid_value, grid_bound=orc.grid_bound)
        return IndexEstimate(est.upper, est.witness, orc.value, est.known_value, meta)
    return est


@dataclass(frozen=True)
class DualityReport:
    space: IndexEstimate
    dual: IndexEstimate
    difference: float
    tolerance: float

    @property
    def ok(self):
        return self.difference <= self.tolerance


def check_duality_equality_findim(space, starts=None, budget=None, seed=0, tol=INDEX_TOL):
    """Compare ``n(X)`` and ``n(X*)``; finite-dimensional spaces are reflexive."""
    a = estimate_index(space, starts, budget, seed)
    b = estimate_index(dual_space(space), starts, budget, seed)
    return DualityReport(a, b, abs(a.value - b.value), tol)


@dataclass(frozen=True)
class SumReport:
    sum_index: IndexEstimate
    left: IndexEstimate
    right: IndexEstimate
    discrepancy: float
    tolerance: float

    @property
    def ok(self):
        return self.discrepancy <= self.tolerance


def check_sum_formula(A, B, mode="inf", starts=None, budget=None, seed=0, tol=INDEX_TOL):
    """``n(A ⊕ B)`` against ``min(n(A), n(B))``."""
    from .constructions import direct_sum
    S = direct_sum(A, B, mode)
    s = estimate_index(S, starts, budget, seed)
    a = estimate_index(A, starts, budget, seed)
    b = estimate_index(B, starts, budget, seed)
    return SumReport(s, a, b, abs(s.value - min(a.value, b.value)), tol)


def in_index_range(value, complex_field, tol=RANGE_TOL, complex_tol=INDEX_TOL):
    """``[0, 1]`` for real spaces, ``[1/e, 1]`` for complex ones."""
    lo = (math.exp(-1) - complex_tol) if complex_field else -tol
    return lo <= value <= 1.0 + tol
