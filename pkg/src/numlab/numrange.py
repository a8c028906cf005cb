"""Numerical radius engines.

Three independent routes: enumeration of extreme dual pairs (real
polytopes), Hermitian-part eigenvalues (Hilbert spaces), and the one-sided
limit ``(||Id + a w T|| - 1)/a`` as ``a -> 0`` (any space with an operator
norm).  Sampling of dual pairs supplies certified lower bounds.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import UnsupportedRepresentation
from .operators import EPS, op_norm, op_norm_bounds
from .polytope import TAU_GEOM
from .spaces import DualPair

OMEGA_GRID = 720
THETA_GRID = 720


class Method(str, enum.Enum):
    EXACT = "ExactEnumeration"
    HILBERT = "HilbertEigen"
    LIMIT = "LimitFormula"
    SAMPLING = "Sampling"


@dataclass(frozen=True)
class RadiusCertificate:
    """``value - error_bound <= v(T) <= value + error_bound``.

    With ``lower_only`` set, only the left inequality is certified.
    """

    value: float
    error_bound: float
    method: Method
    witness: Optional[DualPair] = None
    lower_only: bool = False
    details: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def upper(self):
        return np.inf if self.lower_only else self.value + self.error_bound

    @property
    def lower(self):
        return self.value - self.error_bound


@dataclass(frozen=True)
class AlphaSchedule:
    alphas: tuple
    omega_grid: int = OMEGA_GRID
    stop_tol: float = 1e-10

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        if a.size == 0 or np.any(a <= 0) or np.any(np.diff(a) >= 0):
            raise ValueError("alphas must be positive and strictly decreasing")
        if self.omega_grid < 1:
            raise ValueError("omega grid must be positive")

    @classmethod
    def default(cls):
        return cls(tuple(2.0 ** -k for k in range(1, 25)))


def _require(cond, message):
    if not cond:
        raise UnsupportedRepresentation(message)


# ------------------------------------------------------------ exact

def radius_exact_polytope(T):
    s = T.space
    _require(s.is_polytope and not s.is_complex, "exact enumeration needs a real polytope space")
    vals = s.rep.pair_tensor @ T.matrix.reshape(-1)
    k = int(np.argmax(np.abs(vals)))
    vi, fi = s.rep.pair_index
    pair = DualPair(s.rep.vertices[vi[k]].copy(), s.rep.facets[fi[k]].copy())
    return RadiusCertificate(float(abs(vals[k])), 0.0, Method.EXACT, pair)


# ---------------------------------------------------------- hilbert

def _hermitian_parts(M):
    A = 0.5 * (M + M.conj().T)
    K = 0.5j * (M - M.conj().T)
    return A, K


def _lmax_batch(A, K, thetas):
    """Largest eigenvalue of ``cos(t) A + sin(t) K`` for each ``t``."""
    c, s = np.cos(thetas), np.sin(thetas)
    if A.shape[0] == 1:
        return c * A[0, 0].real + s * K[0, 0].real
    if A.shape[0] == 2:
        a = c * A[0, 0].real + s * K[0, 0].real
        d = c * A[1, 1].real + s * K[1, 1].real
        b = c * A[0, 1] + s * K[0, 1]
        return 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)
    H = c[:, None, None] * A[None] + s[:, None, None] * K[None]
    return np.linalg.eigvalsh(H)[:, -1]


def _support_polygon_bound(lam, thetas):
    """Largest modulus over the polygon cut out by the supporting lines
    ``Re(e^{-it} z) <= lambda_max(t)``; it contains the field of values."""
    t0, t1 = thetas, np.roll(thetas, -1)
    h0, h1 = lam, np.roll(lam, -1)
    s = np.sin(t1 - t0)
    x = (h0 * np.sin(t1) - h1 * np.sin(t0)) / s
    y = (h1 * np.cos(t0) - h0 * np.cos(t1)) / s
    return float(np.max(np.hypot(x, y)))


def complex_field_radius(M, grid=THETA_GRID, refine=True, rel_gap=1e-10, max_grid=None):
    """Numerical radius of a complex matrix with a certified upper bound.

    Returns ``(value, upper, theta)``.  ``value`` is attained; ``upper`` is
    the largest vertex of the supporting-line polygon.  When ``refine`` is
    set the grid doubles until the two agree to ``rel_gap``.
    """
    A, K = _hermitian_parts(np.asarray(M, dtype=complex))
    if max_grid is None:
        max_grid = 1 << 15 if A.shape[0] <= 2 else 1 << 12
    while True:
        step = 2 * np.pi / grid
        thetas = step * np.arange(grid)
        lam = _lmax_batch(A, K, thetas)
        k = int(np.argmax(lam))
        value, theta = float(lam[k]), float(thetas[k])
        if refine:
            res = minimize_scalar(lambda t: -_lmax_batch(A, K, np.array([t]))[0],
                                  bounds=(theta - step, theta + step), method="bounded",
                                  options={"xatol": 1e-12})
            if -res.fun > value:
                value, theta = float(-res.fun), float(res.x)
        upper = max(_support_polygon_bound(lam, thetas), value)
        if not refine or upper - value <= rel_gap * max(value, 1.0) or grid >= max_grid:
            return value, upper, theta
        grid *= 2


def radius_hilbert(T, grid=THETA_GRID):
    s = T.space
    _require(not s.is_polytope and s.rep.family == "Hilbert", "Hilbert engine needs a Hilbert space")
    M = T.matrix
    if not s.is_complex:
        S = 0.5 * (M + M.T)
        w, U = np.linalg.eigh(S)
        k = int(np.argmax(np.abs(w)))
        x = U[:, k]
        err = 8 * EPS * s.dim * max(1.0, float(np.abs(w).max()))
        return RadiusCertificate(float(abs(w[k])), err, Method.HILBERT, DualPair(x, x.copy()))
    value, upper, theta = complex_field_radius(M, grid)
    A, K = _hermitian_parts(M)
    w, U = np.linalg.eigh(np.cos(theta) * A + np.sin(theta) * K)
    x = U[:, -1]
    err = upper - value + 8 * EPS * s.dim * max(1.0, value)
    return RadiusCertificate(value, err, Method.HILBERT, DualPair(x, x.conj()),
                             details={"theta": theta, "upper": upper})


# ------------------------------------------------------ limit formula

def _omegas(T, grid):
    if not T.space.is_complex:
        return np.array([1.0, -1.0])
    return np.exp(2j * np.pi * np.arange(grid) / grid)


def _phi_polytope(T, omegas, alpha):
    """``(||Id + a w T|| - 1)/a`` on a polytope, evaluated without cancellation.

    ``||Id + aS|| - 1 = max_{g,v} [(g(v) - 1) + a g(Sv)]`` over facets ``g``
    and vertices ``v``.
    """
    P = T.space.rep
    q = P.norm_tensor @ T.matrix.reshape(-1)
    off = P.norm_offsets / alpha
    return np.array([np.max(off + np.real(w) * q) for w in omegas])


def _phi_hilbert(T, omegas, alpha):
    """Stable form: with ``m = lambda_max(2 Re(wT) + a T^*T)``,
    ``phi = m / (sqrt(1 + a m) + 1)``."""
    M = T.matrix
    G = M.conj().T @ M
    W = np.asarray(omegas)[:, None, None] * M[None]
    H = W + np.conj(np.swapaxes(W, 1, 2)) + alpha * G[None]
    m = np.linalg.eigvalsh(H)[:, -1]
    return m / (np.sqrt(np.maximum(1.0 + alpha * m, 0.0)) + 1.0)


def _phi_generic(T, omegas, alpha):
    vals, slack = [], 0.0
    for w in omegas:
        S = T.plus_identity(alpha * w)
        lo, hi = op_norm_bounds(S)
        vals.append((lo - 1.0) / alpha)
        slack = max(slack, (hi - lo) / alpha)
    return np.array(vals), slack


def limit_formula_profile(T, schedule=None):
    """Table ``phi[k, j] = phi_{w_j}(alpha_k)`` along the full schedule."""
    schedule = schedule or AlphaSchedule.default()
    omegas = _omegas(T, schedule.omega_grid)
    rows = []
    for a in schedule.alphas:
        if T.space.is_polytope:
            rows.append(_phi_polytope(T, omegas, a))
        elif T.space.rep.family == "Hilbert":
            rows.append(_phi_hilbert(T, omegas, a))
        else:
            rows.append(_phi_generic(T, omegas, a)[0])
    return np.array(rows), omegas


def radius_limit_formula(T, schedule=None):
    schedule = schedule or AlphaSchedule.default()
    s = T.space
    omegas = _omegas(T, schedule.omega_grid)
    if s.is_polytope:
        evaluate = lambda om, a: (_phi_polytope(T, om, a), 0.0)
    elif s.rep.family == "Hilbert":
        evaluate = lambda om, a: (_phi_hilbert(T, om, a), 0.0)
    else:
        evaluate = lambda om, a: _phi_generic(T, om, a)
    norm_T, norm_err = op_norm(T)
    history, slack = [], 0.0
    best_j = 0
    for a in schedule.alphas:
        phi, sl = evaluate(omegas, a)
        slack = max(slack, sl)
        best_j = int(np.argmax(phi))
        history.append(float(phi[best_j]))
        if len(history) > 1 and abs(history[-1] - history[-2]) < schedule.stop_tol:
            break
    alpha = schedule.alphas[len(history) - 1]
    value = history[-1]
    grid_err = 0.0
    if s.is_complex:
        step = 2 * np.pi / schedule.omega_grid
        t0 = float(np.angle(omegas[best_j]))
        res = minimize_scalar(lambda t: -evaluate(np.array([np.exp(1j * t)]), alpha)[0][0],
                              bounds=(t0 - step, t0 + step), method="bounded",
                              options={"xatol": 1e-12})
        value = max(value, float(-res.fun))
        grid_err = np.pi / schedule.omega_grid * (norm_T + norm_err)
    tail = history[-2] - history[-1] if len(history) > 1 else value
    stable = s.is_polytope or s.rep.family == "Hilbert"
    roundoff = 64 * EPS * s.dim * (1.0 + norm_T) * (1.0 if stable else 1.0 / alpha)
    err = max(tail, 0.0) + roundoff + grid_err + slack
    return RadiusCertificate(value, err, Method.LIMIT,
                             details={"alpha": alpha, "steps": len(history), "history": history})


# ------------------------------------------------------------ sampling

def _sample_pairs(space, samples, rng):
    x = rng.standard_normal((samples, space.dim))
    if space.is_complex:
        x = x + 1j * rng.standard_normal((samples, space.dim))
    if space.is_polytope:
        F = space.rep.facets
        vals = x @ F.T
        j = np.argmax(vals, axis=1)
        nrm = vals[np.arange(samples), j]
        return x / nrm[:, None], F[j]
    xs, fs = [], []
    for v in x:
        v = v / space.norm(v)
        xs.append(v)
        fs.append(space.support(v))
    return np.array(xs), np.array(fs)


def radius_lower_sampling(T, samples=1000, seed=0):
    """Best ``|f(Tx)|`` over sampled dual pairs: a one-sided lower bound."""
    rng = np.random.default_rng(seed)
    xs, fs = _sample_pairs(T.space, samples, rng)
    vals = np.abs(np.sum(fs * (xs @ T.matrix.T), axis=1))
    k = int(np.argmax(vals))
    return RadiusCertificate(float(vals[k]), 0.0, Method.SAMPLING, DualPair(xs[k], fs[k]), lower_only=True)


# ----------------------------------------------------------- dispatch

def numerical_radius(T, method="auto", **kwargs):
    """Radius certificate by the named engine (``exact|hilbert|limit|sample|auto``)."""
    s = T.space
    if method == "exact":
        return radius_exact_polytope(T)
    if method == "hilbert":
        return radius_hilbert(T, **kwargs)
    if method == "limit":
        return radius_limit_formula(T, **kwargs)
    if method == "sample":
        return radius_lower_sampling(T, **kwargs)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if s.is_polytope:
        return radius_exact_polytope(T)
    if s.rep.family == "Hilbert":
        return radius_hilbert(T)
    upper = radius_limit_formula(T)
    lower = radius_lower_sampling(T, seed=kwargs.get("seed", 0))
    return RadiusCertificate(upper.value, upper.error_bound, Method.LIMIT, lower.witness,
                             details={**upper.details, "sample": lower.value,
                                      "consistent": lower.value <= upper.upper + TAU_GEOM})


@dataclass(frozen=True)
class EqualityReport:
    radius: float
    norm: float
    radius_equals_norm: bool
    max_id_norm: float
    id_norm_equals_one_plus: bool
    tolerance: float

    @property
    def consistent(self):
        return self.radius_equals_norm == self.id_norm_equals_one_plus


def _max_id_norm(T, grid=OMEGA_GRID):
    if not T.space.is_complex:
        vals = [op_norm(T.plus_identity(w)) for w in (1.0, -1.0)]
        return max(v for v, _ in vals), max(e for _, e in vals)
    thetas = 2 * np.pi * np.arange(grid) / grid
    vals = [op_norm(T.plus_identity(np.exp(1j * t)))[0] for t in thetas]
    k = int(np.argmax(vals))
    step = 2 * np.pi / grid
    res = minimize_scalar(lambda t: -op_norm(T.plus_identity(np.exp(1j * t)))[0],
                          bounds=(thetas[k] - step, thetas[k] + step), method="bounded")
    best = max(vals[k], -res.fun)
    return best, np.pi / grid * op_norm(T)[0]


def check_radius_norm_equality(T, tol=1e-9):
    """Evaluate both sides of ``v(T) = ||T||  <=>  max_w ||Id + wT|| = 1 + ||T||``."""
    rad = numerical_radius(T)
    nrm, nerr = op_norm(T)
    mx, merr = _max_id_norm(T)
    scale = max(1.0, nrm)
    t_left = tol * scale + rad.error_bound + nerr
    t_right = tol * scale + merr + nerr
    return EqualityReport(rad.value, nrm, abs(rad.value - nrm) <= t_left, mx,
                          abs(mx - 1.0 - nrm) <= t_right, max(t_left, t_right))


def numerical_range_points(T, resolution=256, seed=0):
    """Points of ``V(T)``: every extreme pair on polytopes, sampled pairs otherwise."""
    s = T.space
    if s.is_polytope:
        return s.rep.pair_tensor @ T.matrix.reshape(-1)
    rng = np.random.default_rng(seed)
    xs, fs = _sample_pairs(s, resolution, rng)
    return np.sum(fs * (xs @ T.matrix.T), axis=1)
