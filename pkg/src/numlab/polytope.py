"""Origin-symmetric polytopes kept in double description.

A polytope ball is stored with its vertex list and its facet functionals
``f`` (the facet is ``{x : f(x) = 1}``).  Because the ball is symmetric the
facet functionals are exactly the vertices of the polar polytope, so polar
duality is a swap of the two arrays.  Conversions between the two
descriptions go through qhull.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import InputError

TAU_GEOM = 1e-9
TAU_PAIR = 1e-9


def unique_rows(points, tol=1e-9):
    """Drop rows that coincide with an earlier row up to ``tol`` (sup-norm)."""
    points = np.asarray(points, dtype=float)
    kept = []
    for p in points:
        if kept and np.min(np.max(np.abs(np.asarray(kept) - p), axis=1)) <= tol:
            continue
        kept.append(p)
    return np.asarray(kept, dtype=float).reshape(-1, points.shape[1])


def _canonical_half(points, tol):
    """Rows whose first non-negligible coordinate is positive."""
    out = []
    for p in points:
        nz = np.flatnonzero(np.abs(p) > tol)
        if nz.size and p[nz[0]] > 0:
            out.append(p)
    return np.asarray(out, dtype=float).reshape(-1, points.shape[1])


def symmetrize(points, tol=1e-9):
    """Rebuild a symmetric point set as ``half`` stacked on ``-half``.

    Restores bit-exact ``p <-> -p`` pairing lost to rounding.
    """
    points = unique_rows(points, tol)
    half = unique_rows(_canonical_half(points, tol), tol)
    return np.vstack([half, -half])


def hull_of_symmetric(points, tol=1e-9):
    """Vertices and facet functionals of ``conv(points ∪ -points)``.

    Returns ``(vertices, facets)``; facets are normalized so that
    ``max_v f(v) = 1``.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise InputError("need a non-empty 2-D array of points")
    points = np.vstack([points, -points])
    dim = points.shape[1]
    if dim == 1:
        r = float(np.max(np.abs(points)))
        if r <= tol:
            raise InputError("degenerate polytope: all points at the origin")
        return np.array([[r], [-r]]), np.array([[1.0 / r], [-1.0 / r]])
    try:
        hull = ConvexHull(points)
    except Exception as exc:  # qhull raises its own error type
        raise InputError(f"points do not span a full-dimensional body: {exc}") from exc
    normals = hull.equations[:, :-1]
    offsets = hull.equations[:, -1]
    if np.any(offsets >= -tol):
        raise InputError("origin is not interior to the hull")
    facets = normals / (-offsets)[:, None]
    vertices = points[np.unique(hull.vertices)]
    return symmetrize(vertices, tol), symmetrize(facets, tol)


@dataclass(frozen=True, eq=False)
class ExactPolytope:
    """Symmetric polytope ball with both descriptions and their incidences.

    ``incidence[i, j]`` is true when vertex ``i`` lies on facet ``j``.
    """

    vertices: np.ndarray
    facets: np.ndarray
    incidence: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        f = np.atleast_2d(np.asarray(self.facets, dtype=float))
        if v.shape[1] != f.shape[1]:
            raise InputError("vertex and facet dimensions differ")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facets", f)
        if self.incidence is None:
            inc = np.abs(v @ f.T - 1.0) <= TAU_GEOM
            inc.setflags(write=False)
            object.__setattr__(self, "incidence", inc)

    @classmethod
    def from_vertices(cls, points):
        """Polytope ``conv(±points)``; non-extreme points are discarded."""
        v, f = hull_of_symmetric(points)
        return cls(v, f)

    @classmethod
    def from_facets(cls, functionals):
        """Polytope ``{x : |g(x)| <= 1 for all g}``; redundant rows are discarded."""
        f, v = hull_of_symmetric(functionals)
        return cls(v, f)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def polar(self):
        return ExactPolytope(self.facets, self.vertices, self.incidence.T)

    def norm(self, x):
        return float(np.max(self.facets @ np.asarray(x, dtype=float)))

    def dual_norm(self, g):
        return float(np.max(self.vertices @ np.asarray(g, dtype=float)))

    @cached_property
    def pair_index(self):
        """``(vertex index, facet index)`` arrays of all incident pairs."""
        return np.nonzero(self.incidence)

    @cached_property
    def pair_tensor(self):
        """Rows ``vec(f ⊗ x)`` over incident pairs, so ``f(Tx) = row · vec(T)``."""
        vi, fi = self.pair_index
        d = self.dim
        return np.einsum("ki,kj->kij", self.facets[fi], self.vertices[vi]).reshape(-1, d * d)

    @cached_property
    def norm_tensor(self):
        """Rows ``vec(g ⊗ v)`` over all facets g and vertices v.

        ``max(norm_tensor @ vec(T))`` is the operator norm of ``T``.
        """
        d = self.dim
        return np.einsum("ai,bj->abij", self.facets, self.vertices).reshape(-1, d * d)

    @cached_property
    def norm_offsets(self):
        """``g(v) - 1`` aligned with :attr:`norm_tensor` rows."""
        return (self.facets @ self.vertices.T - 1.0).reshape(-1)

    def facet_vertices(self, j):
        return self.vertices[self.incidence[:, j]]

    def slice_vertices(self, functional, eps):
        """Vertices of the closed slice ``{x in B : f(x) >= 1 - eps}``."""
        f = np.asarray(functional, dtype=float)
        on_top = self.vertices[self.vertices @ f >= 1.0 - TAU_GEOM]
        if self.dim == 1:
            return on_top
        center = (1.0 - eps / 2.0) * on_top.mean(axis=0)
        # halfspaces as  A x + b <= 0
        hs = np.vstack([
            np.hstack([self.facets, -np.ones((len(self.facets), 1))]),
            np.hstack([-f[None, :], [[1.0 - eps]]]),
        ])
        pts = HalfspaceIntersection(hs, center).intersections
        return unique_rows(pts, 1e-9)
