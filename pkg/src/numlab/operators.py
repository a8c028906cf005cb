"""Operators on a :class:`~numlab.spaces.Space`: norms, adjoints, generators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .errors import InputError
from .spaces import Space, dual_space

EPS = np.finfo(float).eps
ASCENT_STARTS = 64
ASCENT_ITERS = 200


@dataclass(frozen=True)
class NormEstimate:
    value: float
    error_bound: float
    method: str
    lower: float
    upper: float


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on ``space``; immutable once built."""

    matrix: np.ndarray
    space: Space

    def __post_init__(self):
        raw = np.asarray(self.matrix)
        if np.iscomplexobj(raw) and not self.space.is_complex:
            if np.max(np.abs(raw.imag)) > 0:
                raise InputError("complex entries on a real space")
            raw = raw.real
        m = np.array(raw, dtype=complex if self.space.is_complex else float)
        if m.shape != (self.space.dim, self.space.dim):
            raise InputError(f"matrix shape {m.shape} does not match dim {self.space.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, space):
        return cls(np.eye(space.dim), space)

    @cached_property
    def norm_estimate(self):
        return _op_norm(self)

    @property
    def norm(self):
        return self.norm_estimate.value

    def scaled(self, c):
        return Operator(c * self.matrix, self.space)

    def plus_identity(self, c=1.0):
        """``Id + c T`` on the same space."""
        return Operator(np.eye(self.space.dim) + c * self.matrix, self.space)

    def apply(self, x):
        return self.matrix @ np.asarray(x)

    def __repr__(self):
        return f"Operator({self.matrix.tolist()}, {self.space!r})"


def op_norm(T):
    """``(value, error_bound)`` for ``||T||``."""
    est = T.norm_estimate
    return est.value, est.error_bound


def op_norm_bounds(T):
    est = T.norm_estimate
    return est.lower, est.upper


def _op_norm(T):
    s = T.space
    M = T.matrix
    if s.is_polytope:
        v = float(np.max(s.rep.norm_tensor @ M.reshape(-1)))
        return NormEstimate(v, 0.0, "exact", v, v)
    fam = s.rep.family
    if fam == "Hilbert":
        v = float(np.linalg.norm(M, 2))
        err = 8 * EPS * s.dim * max(v, 1.0)
        return NormEstimate(v, err, "svd", v - err, v + err)
    if fam == "SubspaceOfPolytope" and not s.rep.params.get("dual"):
        return _subspace_lp_norm(T)
    return _ascent_norm(T)


def _subspace_lp_norm(T):
    """Exact norm on a polytope section: one LP per ambient facet."""
    F, B = T.space.rep.params["ambient_facets"], T.space.rep.params["basis"]
    G = F @ B
    G = G[np.max(np.abs(G), axis=1) > 1e-14]
    rows = G @ T.matrix
    best = 0.0
    for r in rows:
        if not np.any(np.abs(r) > 0):
            continue
        res = linprog(-r, A_ub=G, b_ub=np.ones(len(G)), bounds=[(None, None)] * G.shape[1], method="highs")
        best = max(best, -res.fun)
    err = 1e-9 * max(best, 1.0)
    return NormEstimate(best, err, "lp", best - err, best + err)


def _column_bound(T):
    """``sum_j ||T e_j|| ||e_j^*||_*``; ``inf`` when no dual norm exists."""
    s = T.space
    try:
        eye = np.eye(s.dim)
        return float(sum(s.norm(T.matrix[:, j]) * s.dual_norm(eye[j]) for j in range(s.dim)))
    except Exception:
        return np.inf


def _riesz_thorin(T):
    p = T.space.rep.params.get("p")
    if p is None:
        return np.inf
    a = np.abs(T.matrix)
    n1, ninf = a.sum(axis=0).max(), a.sum(axis=1).max()
    if np.isinf(p):
        return float(ninf)
    return float(n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p))


def _ascent_norm(T, starts=ASCENT_STARTS, iters=ASCENT_ITERS, seed=0):
    """Sampling plus local ascent (lower) and a column/interpolation bound (upper)."""
    s, M = T.space, T.matrix
    lower = 0.0
    power = s.rep.dual_support is not None
    for child in np.random.SeedSequence(seed).spawn(starts):
        rng = np.random.default_rng(child)
        x = rng.standard_normal(s.dim)
        if s.is_complex:
            x = x + 1j * rng.standard_normal(s.dim)
        x = x / s.norm(x)
        val = s.norm(M @ x)
        step = 0.5
        for _ in range(iters):
            if power:
                f = s.support(M @ x)
                cand = s.dual_support(M.T @ f)
            else:
                d = rng.standard_normal(s.dim)
                if s.is_complex:
                    d = d + 1j * rng.standard_normal(s.dim)
                cand = x + step * d / np.linalg.norm(d)
            nc = s.norm(cand)
            if nc == 0:
                continue
            cand = cand / nc
            cv = s.norm(M @ cand)
            if cv > val * (1 + 1e-15):
                x, val = cand, cv
            elif power:
                break
            else:
                step *= 0.9
        lower = max(lower, val)
    upper = min(_column_bound(T), _riesz_thorin(T) if s.rep.family == "Lp" else np.inf)
    upper = max(upper, lower)
    if np.isinf(upper):
        return NormEstimate(lower, np.inf, "ascent", lower, np.inf)
    return NormEstimate(0.5 * (lower + upper), 0.5 * (upper - lower), "ascent", lower, upper)


def adjoint(T):
    """``T*`` on the dual space; under the bilinear pairing its matrix is ``T^t``."""
    return Operator(T.matrix.T, dual_space(T.space))


def random_operator(space, seed, scale=1.0):
    """Entries uniform on ``[-1, 1]`` times ``scale``; complex parts drawn independently."""
    if not scale > 0:
        raise InputError("scale must be positive")
    rng = np.random.default_rng(seed)
    shape = (space.dim, space.dim)
    m = rng.uniform(-1.0, 1.0, shape)
    if space.is_complex:
        m = m + 1j * rng.uniform(-1.0, 1.0, shape)
    return Operator(scale * m, space)
