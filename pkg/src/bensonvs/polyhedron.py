"""Outer (H and V form) and inner (V form) polyhedral approximations.

:class:`Polyhedron` keeps a halfspace list together with its vertices and
rays, maintained by double description on the homogenization
``{(y, t) : w.y - gamma t >= 0, t >= 0}``.  Cuts are applied incrementally.

:class:`InnerPolyhedron` is the plain generator form ``conv V + cone D``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._dd import DoubleDescription
from .config import TOL_DEDUPE, TOL_GEOM
from .cone import Cone
from .errors import DimMismatch, EmptyResult, Infeasible, RankDeficient, UnboundedBelow


@dataclass(frozen=True)
class Halfspace:
    """``{y : w.y >= gamma}`` with ``|w| = 1``."""

    w: np.ndarray
    gamma: float

    @classmethod
    def make(cls, w, gamma) -> "Halfspace":
        w = np.asarray(w, dtype=float)
        n = np.linalg.norm(w)
        if n == 0:
            raise ValueError("halfspace normal must be nonzero")
        return cls(w / n, float(gamma) / n)

    def slack(self, y) -> float:
        return float(self.w @ np.asarray(y, dtype=float) - self.gamma)


@dataclass
class CutReport:
    cut: list[int] = field(default_factory=list)
    kept: list[int] = field(default_factory=list)
    new: list[int] = field(default_factory=list)

    @property
    def redundant(self) -> bool:
        return not self.cut


def _homogeneous_normalizer():
    def normalize(R: np.ndarray) -> np.ndarray:
        R = R.copy()
        t = R[:, -1]
        head = np.linalg.norm(R[:, :-1], axis=1)
        is_vertex = t > 1e-11 * np.maximum(head, 1.0)
        R[is_vertex] /= t[is_vertex, None]
        rays = ~is_vertex
        if rays.any():
            R[rays, :-1] /= head[rays, None]
            R[rays, -1] = 0.0
        return R

    return normalize


class Polyhedron:
    """H- and V-representation of a pointed polyhedron in ``R^q``.

    Vertices carry integer ids in creation order; ids of surviving vertices
    never change across cuts.
    """

    def __init__(self, dd: DoubleDescription, halfspaces: list[Halfspace], cone: Cone | None, tol: float):
        self._dd = dd
        self.halfspaces = halfspaces
        self.cone = cone
        self.tol = tol
        self.dim = dd.d - 1
        self._ids = np.arange(dd.n_rays)
        self._next_id = dd.n_rays
        if not self._is_vertex().any():
            raise Infeasible("the halfspace system has no vertex (empty intersection)")

    @classmethod
    def from_halfspaces(cls, hs, cone: Cone | None = None, tol: float = TOL_GEOM) -> "Polyhedron":
        hs = list(hs)
        if not hs:
            raise ValueError("need at least one halfspace")
        q = hs[0].w.shape[0]
        rows = [np.append(np.zeros(q), 1.0)]
        rows += [np.append(h.w, -h.gamma) for h in hs]
        try:
            dd = DoubleDescription(np.array(rows), tol=tol, normalize=_homogeneous_normalizer())
        except RankDeficient as exc:
            raise UnboundedBelow("the halfspace normals do not span R^q; no vertex exists") from exc
        except EmptyResult as exc:
            raise Infeasible(str(exc)) from exc
        # keep only halfspaces that made it into the description
        kept = [hs[i - 1] for i in dd.row_ids if i is not None and i > 0]
        return cls(dd, kept, cone, tol)

    # -- queries ---------------------------------------------------------
    def _is_vertex(self) -> np.ndarray:
        return self._dd.R[:, -1] > 0.5

    def vertices(self) -> np.ndarray:
        """Vertices as rows, in creation order."""
        return self._dd.R[self._is_vertex(), :-1].copy()

    def vertex_ids(self) -> np.ndarray:
        return self._ids[self._is_vertex()].copy()

    def vertex(self, vid: int) -> np.ndarray:
        k = np.flatnonzero(self._ids == vid)
        if k.size == 0 or not self._is_vertex()[k[0]]:
            raise KeyError(vid)
        return self._dd.R[k[0], :-1].copy()

    def rays(self) -> np.ndarray:
        return self._dd.R[~self._is_vertex(), :-1].copy()

    def incidence(self) -> np.ndarray:
        """Vertex-by-halfspace incidence (rows follow :meth:`vertices`)."""
        return self._dd.inc[self._is_vertex()][:, 1:]

    def halfspace_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        W = np.array([h.w for h in self.halfspaces]).reshape(-1, self.dim)
        g = np.array([h.gamma for h in self.halfspaces])
        return W, g

    def contains(self, y, tol: float = 1e-6) -> bool:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim,):
            raise DimMismatch(f"expected length {self.dim}, got {y.shape}")
        W, g = self.halfspace_arrays()
        return bool((W @ y - g >= -tol).all())

    # -- updates ---------------------------------------------------------
    def add_halfspace(self, h: Halfspace) -> CutReport:
        """Intersect in place with ``h``; a halfspace that cuts nothing is dropped."""
        if h.w.shape != (self.dim,):
            raise DimMismatch(f"expected a normal of length {self.dim}")
        was_vertex = self._is_vertex()
        old_ids = self._ids
        res = self._dd.add_row(np.append(h.w, -h.gamma), row_id=len(self.halfspaces) + 1)
        vids = old_ids[was_vertex]
        if res is None:
            return CutReport(cut=[], kept=vids.tolist(), new=[])
        keep, n_new = res
        if not (self._dd.R[:, -1] > 0.5).any():
            raise EmptyResult("cut removed every vertex")
        self.halfspaces.append(h)
        new_ids = np.arange(self._next_id, self._next_id + n_new)
        self._next_id += n_new
        self._ids = np.concatenate([old_ids[keep], new_ids])
        is_v = self._is_vertex()
        report = CutReport(
            cut=old_ids[was_vertex & ~keep].tolist(),
            kept=old_ids[was_vertex & keep].tolist(),
            new=[int(i) for i, v in zip(new_ids, is_v[-n_new:] if n_new else []) if v],
        )
        return report


class InnerPolyhedron:
    """Generator form ``conv V + cone D``; points as rows."""

    def __init__(self, points, cone: Cone, tol_dedupe: float = TOL_DEDUPE):
        self.cone = cone
        self.tol_dedupe = tol_dedupe
        self.dim = cone.dim
        self._points: list[np.ndarray] = []
        for p in np.atleast_2d(np.asarray(points, dtype=float)):
            self.add_point(p)

    @property
    def D(self) -> np.ndarray:
        return self.cone.D

    def vertices(self) -> np.ndarray:
        return np.array(self._points).reshape(-1, self.dim)

    def __len__(self) -> int:
        return len(self._points)

    def dominated(self, p) -> bool:
        """True when ``p`` is already covered: near an existing point or C-above one."""
        p = np.asarray(p, dtype=float)
        for v in self._points:
            if np.linalg.norm(v - p) <= self.tol_dedupe or self.cone.leq(v, p):
                return True
        return False

    def add_point(self, p) -> bool:
        """Append ``p`` unless it is a duplicate or dominated; report whether it was added."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DimMismatch(f"expected length {self.dim}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("inner points must be finite")
        if self.dominated(p):
            return False
        self._points.append(p.copy())
        return True

    def contains(self, y, tol: float = 1e-6) -> bool:
        from .solvers import project_onto_inner

        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim,):
            raise DimMismatch(f"expected length {self.dim}, got {y.shape}")
        return project_onto_inner(self.vertices().T, self.D, y).dist <= tol

    def to_halfspaces(self, tol: float = TOL_GEOM) -> list[Halfspace]:
        """Facets of ``conv V + cone D`` via double description on the polar cone."""
        V = self.vertices()
        rows = [np.append(v, -1.0) for v in V] + [np.append(d, 0.0) for d in self.D.T]
        A = np.array(rows)
        scale = np.maximum(1.0, np.linalg.norm(A, axis=1, keepdims=True))
        R = DoubleDescription(A / scale, tol=tol).R
        out = []
        for r in R:
            w, gamma = r[:-1], r[-1]
            if np.linalg.norm(w) <= 1e-12:
                continue  # trivial inequality 0 >= -1
            out.append(Halfspace.make(w, gamma))
        return out
