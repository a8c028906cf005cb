"""Structural predicates on polytope spaces and on models of ``C(K)``.

The polytope checks (lushness, almost-CL, extreme pairs) are falsifiers at a
declared resolution.  The ``C(K)`` part models ``K`` as a finite union of
convergent sequences with their limits; functionals are finite atomic
measures plus geometric tails.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, UnsupportedRepresentation
from .polytope import TAU_PAIR

LUSH_EPSILONS = (0.5, 0.25, 0.1)
LUSH_GRID = 64
CL_TOL = 1e-9


def _require_polytope(space):
    if not space.is_polytope or space.is_complex:
        raise UnsupportedRepresentation("this verifier needs a real polytope space")
    return space.rep


def sphere_grid(space, n, seed=0):
    """``n`` points of the unit sphere of ``space``.

    In the plane these are equally spaced directions; otherwise seeded
    Gaussian directions.
    """
    if space.dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(th), np.sin(th)])
    else:
        pts = np.random.default_rng(seed).standard_normal((n, space.dim))
    return np.array([p / space.norm(p) for p in pts])


def hull_distance(facets, x, points):
    """``dist(x, conv(points))`` in the norm whose ball is ``{F z <= 1}``."""
    S = np.asarray(points, dtype=float)
    m = len(S)
    G = facets @ S.T
    A = np.hstack([-G, -np.ones((len(facets), 1))])
    b = -(facets @ x)
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_eq = np.append(np.ones(m), 0.0)[None]
    res = linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    return max(float(res.fun), 0.0)


# ------------------------------------------------------------- lushness

@dataclass(frozen=True)
class SliceSpec:
    functional: np.ndarray
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InputError("slice epsilon must lie in (0, 1)")


@dataclass
class LushReport:
    predicate: str
    failures: list
    checked: int
    stats: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures

    @property
    def pass_rate(self):
        return 1.0 - len(self.failures) / self.checked if self.checked else 1.0


def lushness_test(space, x_grid=None, y_grid=None, epsilons=LUSH_EPSILONS, candidates=None,
                  grid=LUSH_GRID, seed=0):
    """Search for ``(x, y, eps)`` with no slice through ``y`` whose symmetric hull is
    within ``eps`` of ``x``.

    Candidate slice functionals default to the facet functionals; each slice
    is taken closed, so its hull uses the cut points on the edges as well as
    the vertices.
    """
    P = _require_polytope(space)
    xs = sphere_grid(space, grid, seed) if x_grid is None else np.asarray(x_grid, dtype=float)
    ys = sphere_grid(space, grid, seed + 1) if y_grid is None else np.asarray(y_grid, dtype=float)
    cands = P.facets if candidates is None else np.asarray(candidates, dtype=float)
    cands = np.array([g / P.dual_norm(g) for g in cands])
    failures = []
    for eps in epsilons:
        SliceSpec(cands[0], eps)
        dist = np.empty((len(cands), len(xs)))
        for j, g in enumerate(cands):
            S = P.slice_vertices(g, eps)
            S = np.vstack([S, -S])
            dist[j] = [hull_distance(P.facets, x, S) for x in xs]
        active = (ys @ cands.T) > 1.0 - eps
        for iy, y in enumerate(ys):
            good = dist[active[iy]].min(axis=0) < eps if active[iy].any() else np.zeros(len(xs), bool)
            for ix in np.flatnonzero(~good):
                failures.append({"x": xs[ix].tolist(), "y": y.tolist(), "epsilon": eps})
    checked = len(xs) * len(ys) * len(epsilons)
    return LushReport("lush", failures, checked,
                      {"candidates": len(cands), "grid": [len(xs), len(ys)],
                       "epsilons": list(epsilons), "candidate_kind": "facet functionals"})


# ----------------------------------------------------------- almost-CL

@dataclass
class CLReport:
    predicate: str
    ok: bool
    witnesses: list
    stats: dict = field(default_factory=dict)


def almost_cl_test(space, tol=CL_TOL):
    """Every vertex of the ball must lie in ``conv(F ∪ -F)`` for every facet ``F``."""
    P = _require_polytope(space)
    witnesses = []
    worst = 0.0
    for j in range(len(P.facets)):
        F = P.facet_vertices(j)
        S = np.vstack([F, -F])
        for i, v in enumerate(P.vertices):
            d = hull_distance(P.facets, v, S)
            worst = max(worst, d)
            if d > tol:
                witnesses.append({"facet": j, "vertex": i, "distance": d})
    return CLReport("almostcl", not witnesses, witnesses,
                    {"facets": len(P.facets), "vertices": len(P.vertices), "max_distance": worst})


# -------------------------------------------------------- extreme pairs

@dataclass
class PairReport:
    predicate: str
    minimum: float
    histogram: Tuple[list, list]
    all_one: bool
    witnesses: list


def extreme_pair_report(space, bins=10):
    """``|x*(x)|`` over vertices ``x`` of the ball and vertices ``x*`` of the dual ball."""
    P = _require_polytope(space)
    vals = np.abs(P.vertices @ P.facets.T)
    counts, edges = np.histogram(vals, bins=bins, range=(0.0, 1.0 + TAU_PAIR))
    minimum = float(vals.min())
    low = np.argwhere(vals < 1.0 - TAU_PAIR)
    witnesses = [{"vertex": int(i), "dual_vertex": int(j), "value": float(vals[i, j])}
                 for i, j in low[:20]]
    return PairReport("pairs", minimum, (counts.tolist(), edges.tolist()),
                      bool(np.all(np.abs(vals - 1.0) <= TAU_PAIR)), witnesses)


# ------------------------------------------------------------- C(K) models

_ISOLATED = re.compile(r"^(.+):(\d+)$")


@dataclass(frozen=True)
class Sequence:
    """Isolated points ``name:1, name:2, ...`` converging to ``limit``."""

    name: str
    limit: str


@dataclass(frozen=True)
class KModel:
    sequences: Tuple[Sequence, ...]

    def __post_init__(self):
        names = [s.name for s in self.sequences]
        if not names:
            raise InputError("a K model needs at least one sequence")
        if len(set(names)) != len(names):
            raise InputError("sequence names must be distinct")
        if set(names) & self.limits:
            raise InputError("a label cannot be both a sequence and a limit")

    @classmethod
    def one_point(cls):
        """``ℕ ∪ {∞}``; isolated points may be written as plain integers."""
        return cls((Sequence("n", "inf"),))

    @property
    def limits(self):
        return frozenset(s.limit for s in self.sequences)

    def sequence(self, name):
        for s in self.sequences:
            if s.name == name:
                return s
        raise InputError(f"unknown sequence {name!r}")

    def resolve(self, point):
        """Canonical label; ``("iso", seq, n)`` or ``("lim", label)``."""
        if isinstance(point, (int, np.integer)) or (isinstance(point, str) and point.isdigit()):
            if len(self.sequences) != 1:
                raise InputError(f"bare index {point!r} is ambiguous with several sequences")
            point = f"{self.sequences[0].name}:{int(point)}"
        if point in ("∞",) and "inf" in self.limits:
            point = "inf"
        if point in self.limits:
            return ("lim", point)
        m = _ISOLATED.match(str(point))
        if m and int(m.group(2)) >= 1:
            self.sequence(m.group(1))
            return ("iso", m.group(1), int(m.group(2)))
        raise InputError(f"unknown point {point!r}")

    def is_isolated(self, point):
        return self.resolve(point)[0] == "iso"

    def truncation(self, N):
        """Points of ``K_N``: the first ``N`` of each sequence, then the limits.

        ``C(K_N)`` is the subspace of functions constant beyond index ``N``.
        """
        pts = [f"{s.name}:{n}" for s in self.sequences for n in range(1, N + 1)]
        return pts + sorted(self.limits)


@dataclass(frozen=True)
class Tail:
    """Weights ``first * ratio**(n - start)`` on ``seq:n`` for ``n >= start``."""

    sequence: str
    start: int
    first: float
    ratio: float

    def __post_init__(self):
        if self.start < 1 or not 0 <= abs(self.ratio) < 1:
            raise InputError("tails need start >= 1 and |ratio| < 1")

    def weight(self, n):
        return self.first * self.ratio ** (n - self.start) if n >= self.start else 0.0

    def mass_beyond(self, N):
        """Sum of weights with index ``> N``."""
        k = max(N + 1, self.start)
        return self.first * self.ratio ** (k - self.start) / (1.0 - self.ratio)

    @property
    def total_variation(self):
        return abs(self.first) / (1.0 - abs(self.ratio))


@dataclass(frozen=True)
class MeasureModel:
    """Atomic measure on ``K``: finitely many atoms plus geometric tails."""

    atoms: Dict[str, float] = field(default_factory=dict)
    tails: Tuple[Tail, ...] = ()

    @property
    def support(self):
        """Atoms with nonzero weight, plus ``(sequence, start)`` for each nonzero tail."""
        pts = {p for p, w in self.atoms.items() if w != 0}
        return pts | {(t.sequence, t.start) for t in self.tails if t.first != 0}

    @property
    def total_variation(self):
        return sum(abs(w) for w in self.atoms.values()) + sum(t.total_variation for t in self.tails)

    def validate(self, K):
        for p in self.atoms:
            K.resolve(p)
        for t in self.tails:
            K.sequence(t.sequence)
        return self

    def restricted(self, K, N):
        """Vector ``a`` with ``f(y) = a . y`` for ``y`` in ``C(K_N)``."""
        pts = K.truncation(N)
        index = {p: i for i, p in enumerate(pts)}
        a = np.zeros(len(pts))
        for p, w in self.atoms.items():
            r = K.resolve(p)
            if r[0] == "lim":
                a[index[r[1]]] += w
            elif r[2] <= N:
                a[index[f"{r[1]}:{r[2]}"]] += w
            else:
                a[index[K.sequence(r[1]).limit]] += w
        for t in self.tails:
            for n in range(t.start, N + 1):
                a[index[f"{t.sequence}:{n}"]] += t.weight(n)
            a[index[K.sequence(t.sequence).limit]] += t.mass_beyond(N)
        return a


def c_rich_criterion(K, functionals):
    """``⋂ ker f_i`` is C-rich iff no isolated point carries mass of any ``f_i``."""
    for f in functionals:
        f.validate(K)
        for p, w in f.atoms.items():
            if w != 0 and K.is_isolated(p):
                return False
        if any(t.first != 0 for t in f.tails):
            return False
    return True


@dataclass(frozen=True)
class OpenSet:
    """Finitely many points plus tails ``{seq:n : n >= start}``."""

    points: frozenset = frozenset()
    tails: Dict[str, int] = field(default_factory=dict)

    def validate(self, K):
        if not self.points and not self.tails:
            raise InputError("the open set is empty")
        for name in self.tails:
            K.sequence(name)
        for p in self.points:
            r = K.resolve(p)
            if r[0] == "lim":
                missing = [s.name for s in K.sequences if s.limit == r[1] and s.name not in self.tails]
                if missing:
                    raise InputError(f"open set contains {r[1]!r} but no tail of {missing}")
        return self

    def contains(self, K, label):
        r = K.resolve(label)
        if r[0] == "lim":
            return any(K.resolve(p) == r for p in self.points)
        if r[1] in self.tails and r[2] >= self.tails[r[1]]:
            return True
        return any(K.resolve(p) == r for p in self.points)


@dataclass
class WitnessResult:
    distance: float
    level: int
    peak: Optional[str]
    h: Optional[dict]
    history: list

    @property
    def found(self):
        return self.h is not None


def _witness_lp(A, inside, peak, n):
    """``min ||h - y||∞`` with ``A y = 0``, ``h(peak) = 1``, ``0 <= h <= 1`` on ``inside``."""
    # variables: h (n), y (n), t
    m = 2 * n + 1
    c = np.zeros(m)
    c[-1] = 1.0
    eye = np.eye(n)
    A_ub = np.vstack([np.hstack([eye, -eye, -np.ones((n, 1))]),
                      np.hstack([-eye, eye, -np.ones((n, 1))])])
    b_ub = np.zeros(2 * n)
    A_eq = np.hstack([np.zeros((len(A), n)), A, np.zeros((len(A), 1))])
    bounds = [((1.0, 1.0) if i == peak else (0.0, 1.0) if inside[i] else (0.0, 0.0)) for i in range(n)]
    bounds += [(None, None)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.zeros(len(A)),
                  bounds=bounds, method="highs")
    return float(res.fun), res.x[:n]


def _witness_at_level(K, functionals, U, N):
    pts = K.truncation(N)
    A = np.array([f.restricted(K, N) for f in functionals])
    inside = np.array([U.contains(K, p) for p in pts])
    best = (np.inf, None, None)
    for i in np.flatnonzero(inside):
        d, h = _witness_lp(A, inside, i, len(pts))
        if d < best[0] - 1e-15:
            best = (d, pts[i], h)
        if best[0] <= 1e-12:
            break
    return best, pts


def c_rich_witness_search(K, functionals, U, epsilon, level=64, max_level=1024, stable_tol=1e-12):
    """Distance from the best norm-one bump supported in ``U`` to ``⋂ ker f_i``.

    Works in ``C(K_N)`` starting at ``N = level`` and doubling until the
    distance stops changing or ``N = max_level``.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    for f in functionals:
        f.validate(K)
    U.validate(K)
    history = []
    N = level
    while True:
        (d, peak, h), pts = _witness_at_level(K, functionals, U, N)
        history.append((N, d))
        done = d <= stable_tol or (len(history) > 1 and abs(history[-2][1] - d) <= stable_tol)
        if done or N >= max_level:
            break
        N *= 2
    if d < epsilon and h is not None:
        bump = {p: float(v) for p, v in zip(pts, h) if v != 0}
        return WitnessResult(d, N, peak, bump, history)
    return WitnessResult(d, N, peak, None, history)


# ------------------------------------------------------------- file input

def _measure_from_json(obj):
    atoms = {str(k): float(v) for k, v in obj.get("atoms", {}).items()}
    tails = tuple(Tail(t["sequence"], int(t["start"]), float(t["first"]), float(t["ratio"]))
                  for t in obj.get("tails", []))
    return MeasureModel(atoms, tails)


def load_kmodel(path):
    """Read ``{"sequences", "functionals", "open_set"?, "epsilon"?, "level"?}``."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read K model {path}: {exc}") from exc
    return kmodel_from_json(obj)


def kmodel_from_json(obj):
    seqs = obj.get("sequences") or [{"name": "n", "limit": "inf"}]
    K = KModel(tuple(Sequence(s["name"], s["limit"]) for s in seqs))
    fs = [_measure_from_json(f).validate(K) for f in obj.get("functionals", [])]
    U = None
    if "open_set" in obj:
        u = obj["open_set"]
        U = OpenSet(frozenset(str(p) for p in u.get("points", [])),
                    {k: int(v) for k, v in u.get("tails", {}).items()})
    return {"K": K, "functionals": fs, "open_set": U,
            "epsilon": float(obj.get("epsilon", 0.5)), "level": int(obj.get("level", 64))}
