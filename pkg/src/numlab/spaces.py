"""Finite-dimensional normed spaces: representations, duality, dual pairs.

Vectors and functionals are coordinate arrays.  A functional ``f`` acts by
the bilinear pairing ``f(x) = sum(f * x)`` (no conjugation), so the adjoint
of a matrix is its plain transpose in every field.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np
from scipy.optimize import linprog

from . import expr as E
from .errors import InputError, UnsupportedRepresentation
from .polytope import TAU_GEOM, ExactPolytope, hull_of_symmetric, unique_rows


class FieldTag(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


@dataclass(frozen=True, eq=False)
class NormOracle:
    """A norm given by callables.

    ``support_functional(x)`` returns a dual-norm-one ``f`` with
    ``f(x) = ||x||``.  ``dual_norm``/``dual_support`` are the same pair of
    maps for the dual space, and ``dual()`` builds the dual oracle; any of the
    three may be ``None`` when the family cannot provide it.
    """

    norm: Callable[[np.ndarray], float]
    support_functional: Callable[[np.ndarray], np.ndarray]
    family: str = "Custom"
    params: dict = field(default_factory=dict)
    dual_norm: Optional[Callable[[np.ndarray], float]] = None
    dual_support: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dual: Optional[Callable[[], "NormOracle"]] = None


Representation = Union[ExactPolytope, NormOracle]


@dataclass(frozen=True, eq=False)
class Space:
    field: FieldTag
    dim: int
    rep: Representation
    expr: Any = None
    # columns span the space inside an ambient coordinate system (kernels only)
    embedding: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "field", FieldTag(self.field))
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if isinstance(self.rep, ExactPolytope):
            if self.field is FieldTag.COMPLEX:
                raise InputError("complex spaces cannot carry a polytope representation")
            if self.rep.dim != self.dim:
                raise InputError(f"polytope dimension {self.rep.dim} != {self.dim}")

    @property
    def is_polytope(self):
        return isinstance(self.rep, ExactPolytope)

    @property
    def is_complex(self):
        return self.field is FieldTag.COMPLEX

    @property
    def family(self):
        return "Polytope" if self.is_polytope else self.rep.family

    @property
    def dtype(self):
        return complex if self.is_complex else float

    def norm(self, x):
        return norm_eval(self, x)

    def dual_norm(self, g):
        g = np.asarray(g)
        if self.is_polytope:
            return self.rep.dual_norm(g)
        if self.rep.dual_norm is None:
            raise UnsupportedRepresentation("oracle has no dual norm")
        return float(self.rep.dual_norm(g))

    def support(self, x):
        """Unit functional ``f`` with ``f(x) = ||x||``."""
        x = np.asarray(x)
        if self.is_polytope:
            return self.rep.facets[int(np.argmax(self.rep.facets @ x))].copy()
        return np.asarray(self.rep.support_functional(x))

    def dual_support(self, g):
        """Unit vector ``x`` with ``g(x) = ||g||_*``."""
        g = np.asarray(g)
        if self.is_polytope:
            return self.rep.vertices[int(np.argmax(self.rep.vertices @ g))].copy()
        if self.rep.dual_support is None:
            raise UnsupportedRepresentation("oracle has no dual support map")
        return np.asarray(self.rep.dual_support(g))

    def coordinates(self, ambient_vector):
        """Coordinates of an ambient vector lying in an embedded subspace."""
        if self.embedding is None:
            raise InputError("space has no ambient embedding")
        y, *_ = np.linalg.lstsq(self.embedding, np.asarray(ambient_vector, dtype=float), rcond=None)
        if np.max(np.abs(self.embedding @ y - ambient_vector)) > TAU_GEOM:
            raise InputError("vector does not lie in the subspace")
        return y

    def __repr__(self):
        label = str(self.expr) if self.expr is not None else self.family
        return f"Space({label}, dim={self.dim}, field={self.field.value})"


@dataclass(frozen=True, eq=False)
class DualPair:
    """Unit vector ``x`` and unit functional ``f`` with ``f(x) = 1``."""

    x: np.ndarray
    f: np.ndarray

    @property
    def defect(self):
        return float(abs(np.sum(self.f * self.x) - 1.0))


# ---------------------------------------------------------------- oracles

def _phase(z):
    z = np.asarray(z)
    out = np.zeros_like(z)
    nz = np.abs(z) > 0
    out[nz] = z[nz] / np.abs(z[nz])
    return out


def lp_support(x, p):
    """Dual-norm-one functional attaining ``||x||_p`` under the bilinear pairing."""
    x = np.asarray(x)
    out = np.zeros_like(x)
    nrm = np.linalg.norm(x, ord=p)
    if nrm == 0:
        out[0] = 1
        return out
    if np.isinf(p):
        k = int(np.argmax(np.abs(x)))
        out[k] = np.conj(_phase(x[k]))
        return out
    if p == 1:
        return np.conj(_phase(x))
    a = np.abs(x) / nrm
    return np.conj(_phase(x)) * a ** (p - 1)


def _conjugate_exponent(p):
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_oracle(n, p, field=FieldTag.REAL):
    p = float(p)
    if not (p >= 1):
        raise InputError(f"p must be >= 1, got {p}")
    q = _conjugate_exponent(p)
    return NormOracle(
        norm=lambda x: float(np.linalg.norm(x, ord=p)),
        support_functional=lambda x: lp_support(x, p),
        family="Lp",
        params={"p": p},
        dual_norm=lambda g: float(np.linalg.norm(g, ord=q)),
        dual_support=lambda g: lp_support(g, q),
        dual=lambda: lp_oracle(n, q, field),
    )


def hilbert_oracle():
    return NormOracle(
        norm=lambda x: float(np.linalg.norm(x)),
        support_functional=lambda x: lp_support(x, 2.0),
        family="Hilbert",
        dual_norm=lambda g: float(np.linalg.norm(g)),
        dual_support=lambda g: lp_support(g, 2.0),
        dual=hilbert_oracle,
    )


def swap_oracle(o, family=None, params=None):
    """The oracle of the dual norm, built from ``o``'s dual maps."""
    if o.dual_norm is None or o.dual_support is None:
        raise UnsupportedRepresentation(f"{o.family} oracle has no dual support")
    return NormOracle(
        norm=o.dual_norm,
        support_functional=o.dual_support,
        family=family or o.family,
        params=params if params is not None else dict(o.params),
        dual_norm=o.norm,
        dual_support=o.support_functional,
        dual=lambda: o,
    )


def polytope_oracle(poly):
    """A :class:`NormOracle` view of an exact polytope (for cross-checks)."""
    F, V = poly.facets, poly.vertices
    o = NormOracle(
        norm=lambda x: float(np.max(F @ x)),
        support_functional=lambda x: F[int(np.argmax(F @ x))].copy(),
        family="Custom",
        params={"polytope": True},
        dual_norm=lambda g: float(np.max(V @ g)),
        dual_support=lambda g: V[int(np.argmax(V @ g))].copy(),
    )
    object.__setattr__(o, "dual", lambda: polytope_oracle(poly.polar()))
    return o


def as_oracle(space):
    """Same space with its polytope replaced by an oracle view."""
    if not space.is_polytope:
        return space
    return Space(space.field, space.dim, polytope_oracle(space.rep), space.expr, space.embedding)


def _restricted_lp_max(G, g):
    """``max g·y`` subject to ``G y <= 1``; returns (value, y)."""
    res = linprog(-np.asarray(g, dtype=float), A_ub=G, b_ub=np.ones(len(G)),
                  bounds=[(None, None)] * G.shape[1], method="highs")
    if res.status != 0:
        raise AssertionError(f"restricted support LP failed: {res.message}")
    return -res.fun, res.x


def _min_extension(facets, basis, g):
    """``min sum(mu)`` with ``(F B)^T mu = g``, ``mu >= 0`` (facets symmetric)."""
    G = facets @ basis
    res = linprog(np.ones(len(G)), A_eq=G.T, b_eq=np.asarray(g, dtype=float),
                  bounds=[(0, None)] * len(G), method="highs")
    if res.status != 0:
        raise AssertionError(f"restricted dual norm LP failed: {res.message}")
    return float(res.fun), res.x @ facets


def subspace_oracle(ambient, basis):
    """Norm of ``ambient`` restricted to the column span of ``basis``."""
    B = np.asarray(basis, dtype=float)
    if isinstance(ambient, ExactPolytope) or (isinstance(ambient, Space) and ambient.is_polytope):
        facets = ambient.facets if isinstance(ambient, ExactPolytope) else ambient.rep.facets
        return _polytope_subspace_oracle(facets, B)
    amb = ambient
    return NormOracle(
        norm=lambda y: amb.norm(B @ y),
        support_functional=lambda y: B.T @ amb.support(B @ y),
        family="Custom",
        params={"subspace_of": amb.family},
    )


def _polytope_subspace_oracle(facets, B):
    F = np.asarray(facets, dtype=float)
    G = F @ B
    G = G[np.max(np.abs(G), axis=1) > 1e-14]
    params = {"ambient_facets": F, "basis": B}
    o = NormOracle(
        norm=lambda y: float(np.max(G @ y)),
        support_functional=lambda y: G[int(np.argmax(G @ y))].copy(),
        family="SubspaceOfPolytope",
        params=params,
        dual_norm=lambda g: _min_extension(F, B, g)[0],
        dual_support=lambda g: _restricted_lp_max(G, g)[1],
    )
    object.__setattr__(o, "dual", lambda: swap_oracle(o, params={**params, "dual": True}))
    return o


def sum_oracle(a, b, kind):
    """Oracle for ``a ⊕∞ b`` (``kind='inf'``) or ``a ⊕1 b`` (``kind='one'``).

    ``a`` and ``b`` are :class:`Space` values.
    """
    da, db = a.dim, b.dim
    split = lambda x: (np.asarray(x)[:da], np.asarray(x)[da:])
    has_dual = True
    for s in (a, b):
        if not s.is_polytope and (s.rep.dual_norm is None or s.rep.dual_support is None):
            has_dual = False

    def zeros(n, like):
        return np.zeros(n, dtype=np.result_type(like, float))

    if kind == "inf":
        def norm(x):
            xa, xb = split(x)
            return max(a.norm(xa), b.norm(xb))

        def support(x):
            xa, xb = split(x)
            if a.norm(xa) >= b.norm(xb):
                return np.concatenate([a.support(xa), zeros(db, x)])
            return np.concatenate([zeros(da, x), b.support(xb)])

        def dnorm(g):
            ga, gb = split(g)
            return a.dual_norm(ga) + b.dual_norm(gb)

        def dsupport(g):
            ga, gb = split(g)
            return np.concatenate([a.dual_support(ga), b.dual_support(gb)])
    else:
        def norm(x):
            xa, xb = split(x)
            return a.norm(xa) + b.norm(xb)

        def support(x):
            # a zero block may take any functional of dual norm <= 1
            xa, xb = split(x)
            fa = a.support(xa) if a.norm(xa) > 0 or b.norm(xb) == 0 else zeros(da, x)
            fb = b.support(xb) if b.norm(xb) > 0 else zeros(db, x)
            return np.concatenate([fa, fb])

        def dnorm(g):
            ga, gb = split(g)
            return max(a.dual_norm(ga), b.dual_norm(gb))

        def dsupport(g):
            ga, gb = split(g)
            if a.dual_norm(ga) >= b.dual_norm(gb):
                return np.concatenate([a.dual_support(ga), zeros(db, g)])
            return np.concatenate([zeros(da, g), b.dual_support(gb)])

    o = NormOracle(norm=norm, support_functional=support, family="Custom",
                   params={"sum": kind},
                   dual_norm=dnorm if has_dual else None,
                   dual_support=dsupport if has_dual else None)
    if has_dual:
        def make_dual():
            other = "one" if kind == "inf" else "inf"
            return sum_oracle(dual_space(a), dual_space(b), other)
        object.__setattr__(o, "dual", make_dual)
    return o


# ------------------------------------------------------------- operations

def norm_eval(space, x):
    """``||x||`` in ``space``."""
    x = np.asarray(x)
    if x.shape != (space.dim,):
        raise InputError(f"expected a vector of length {space.dim}, got shape {x.shape}")
    if space.is_polytope:
        return space.rep.norm(x)
    return float(space.rep.norm(x))


def dual_space(space):
    """The dual space, in the coordinates of the bilinear pairing."""
    dual_expr = E.Dual(space.expr) if space.expr is not None else None
    if space.is_polytope:
        return Space(space.field, space.dim, space.rep.polar(), dual_expr)
    if space.rep.dual is None:
        raise UnsupportedRepresentation(f"{space.rep.family} oracle has no dual construction")
    return Space(space.field, space.dim, space.rep.dual(), dual_expr)


def extreme_dual_pairs(space):
    """All incident (vertex, facet) pairs of a polytope space."""
    if not space.is_polytope:
        raise UnsupportedRepresentation("extreme dual pairs need an exact polytope; sample pairs instead")
    vi, fi = space.rep.pair_index
    V, F = space.rep.vertices, space.rep.facets
    return [DualPair(V[i].copy(), F[j].copy()) for i, j in zip(vi, fi)]


def restricted_dual_norm(ambient, basis, g):
    """Smallest ambient dual norm among extensions of ``g`` off a subspace.

    ``g`` is given in the coordinates of ``basis`` (i.e. ``g(y) = g · y`` for
    the subspace vector ``basis @ y``).
    """
    if not ambient.is_polytope:
        raise UnsupportedRepresentation("restricted dual norm needs a polytope ambient space")
    B = np.asarray(basis, dtype=float).reshape(ambient.dim, -1)
    if np.linalg.matrix_rank(B) < B.shape[1]:
        raise InputError("basis vectors are linearly dependent")
    g = np.asarray(g, dtype=float)
    if not np.any(g):
        return 0.0
    return _min_extension(ambient.rep.facets, B, g)[0]


# ------------------------------------------------------------ validation

@dataclass
class Violation:
    kind: str
    magnitude: float
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self):
        return not self.violations

    def kinds(self):
        return sorted({v.kind for v in self.violations})


def _random_vectors(space, count, rng):
    x = rng.standard_normal((count, space.dim))
    if space.is_complex:
        x = x + 1j * rng.standard_normal((count, space.dim))
    return x


def validate_space(space, samples=200, seed=0, tol=TAU_GEOM):
    """Check the representation invariants; violations are collected, not raised."""
    out = []
    rng = np.random.default_rng(seed)
    if space.is_polytope:
        P = space.rep
        V, F = P.vertices, P.facets
        for name, pts in (("vertex-symmetry", V), ("facet-symmetry", F)):
            for p in pts:
                gap = float(np.min(np.max(np.abs(pts + p), axis=1)))
                if gap > tol:
                    out.append(Violation(name, gap, f"no partner for {p}"))
        vals = V @ F.T
        for i, m in enumerate(vals.max(axis=1)):
            if abs(m - 1) > tol:
                out.append(Violation("facet-support", float(abs(m - 1)), f"vertex {i} has max f(v) = {m}"))
        for j, m in enumerate(vals.max(axis=0)):
            if abs(m - 1) > tol:
                out.append(Violation("vertex-support", float(abs(m - 1)), f"facet {j} has max f(v) = {m}"))
        counts = (np.abs(vals - 1) <= tol).sum(axis=0)
        for j in np.flatnonzero(counts < space.dim):
            out.append(Violation("facet-degenerate", float(space.dim - counts[j]),
                                 f"facet {j} touches {counts[j]} vertices"))
        try:
            v2, f2 = hull_of_symmetric(V)
            for name, got, want in (("polar-roundtrip", f2, F), ("polar-roundtrip", v2, V)):
                gap = _set_distance(got, want)
                if gap > 1e-7 or len(got) != len(want):
                    out.append(Violation(name, gap, f"{len(got)} recomputed vs {len(want)} stored"))
        except InputError as exc:
            out.append(Violation("polar-roundtrip", np.inf, str(exc)))
    xs = _random_vectors(space, samples, rng)
    ys = _random_vectors(space, samples, rng)
    cs = rng.standard_normal(samples) * 3
    if space.is_complex:
        cs = cs + 1j * rng.standard_normal(samples)
    for x, y, c in zip(xs, ys, cs):
        nx, ny = space.norm(x), space.norm(y)
        hom = abs(space.norm(c * x) - abs(c) * nx)
        if hom > tol * max(1.0, abs(c) * nx):
            out.append(Violation("homogeneity", hom))
        tri = space.norm(x + y) - nx - ny
        if tri > tol * max(1.0, nx + ny):
            out.append(Violation("triangle", tri))
        f = space.support(x)
        pairing = abs(np.sum(f * x) - nx)
        if pairing > tol * max(1.0, nx):
            out.append(Violation("support-pairing", float(pairing)))
        try:
            dn = abs(space.dual_norm(f) - 1.0)
        except UnsupportedRepresentation:
            dn = 0.0
        if dn > 1e-7:
            out.append(Violation("support-dual-norm", dn))
    return ValidationReport(out)


def _set_distance(a, b):
    """Hausdorff distance (sup-norm) between two finite point sets."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        return np.inf
    d = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def same_vertex_set(a, b, tol=TAU_GEOM):
    return len(unique_rows(a, tol)) == len(unique_rows(b, tol)) and _set_distance(a, b) <= tol


# --------------------------------------------------------- serialization

def _encode(arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1).tolist()
    return arr.tolist()


def _decode(obj, complex_=False):
    arr = np.asarray(obj, dtype=float)
    if complex_:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def space_to_json(space):
    """JSON-ready dict ``{field, dim, rep, expr}``."""
    if space.is_polytope:
        rep = {"kind": "polytope", "vertices": _encode(space.rep.vertices),
               "facets": _encode(space.rep.facets)}
    else:
        o = space.rep
        params = {}
        for k, v in o.params.items():
            if isinstance(v, np.ndarray):
                params[k] = _encode(v)
            elif isinstance(v, float) and np.isinf(v):
                params[k] = "inf"
            else:
                params[k] = v
        if o.family not in ("Lp", "Hilbert", "SubspaceOfPolytope") and space.expr is None:
            raise UnsupportedRepresentation("custom oracles serialize only through their expression")
        rep = {"kind": "oracle", "family": o.family, "params": params}
    emb = {} if space.embedding is None else {"embedding": _encode(space.embedding)}
    return {"field": space.field.value, "dim": space.dim, "rep": rep,
            "expr": str(space.expr) if space.expr is not None else None, **emb}


def space_from_json(obj):
    expr = E.parse_space_expr(obj["expr"]) if obj.get("expr") else None
    fld = FieldTag(obj["field"])
    rep = obj["rep"]
    emb = np.asarray(obj["embedding"], dtype=float) if "embedding" in obj else None
    if rep["kind"] == "polytope":
        r = ExactPolytope(_decode(rep["vertices"]), _decode(rep["facets"]))
    elif rep["family"] == "Lp":
        p = rep["params"]["p"]
        r = lp_oracle(obj["dim"], np.inf if p == "inf" else float(p), fld)
    elif rep["family"] == "Hilbert":
        r = hilbert_oracle()
    elif rep["family"] == "SubspaceOfPolytope":
        prm = rep["params"]
        r = _polytope_subspace_oracle(_decode(prm["ambient_facets"]), _decode(prm["basis"]))
        if prm.get("dual"):
            r = r.dual()
    elif expr is not None:
        from .constructions import build_space
        return build_space(expr)
    else:
        raise UnsupportedRepresentation(f"cannot rebuild oracle family {rep['family']!r}")
    return Space(fld, int(obj["dim"]), r, expr, emb)
