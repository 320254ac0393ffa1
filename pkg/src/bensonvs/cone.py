"""Polyhedral ordering cones ``C = {x : Z^T x >= 0}``.

A :class:`Cone` carries both descriptions of ``C``: the dual generators
``Z`` (columns span ``C+``) and the primal generators ``D`` (columns span
``C``).  Both are stored with unit-norm columns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._dd import DoubleDescription
from .config import TOL_GEOM
from .errors import DimMismatch, EmptyInterior, NotInterior, RankDeficient


def _unit_columns(M: np.ndarray) -> np.ndarray:
    return M / np.linalg.norm(M, axis=0, keepdims=True)


def _dedupe_columns(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    keep: list[int] = []
    for j in range(M.shape[1]):
        if not any(np.linalg.norm(M[:, j] - M[:, k]) <= tol for k in keep):
            keep.append(j)
    return M[:, keep]


@dataclass(frozen=True, eq=False)
class Cone:
    Z: np.ndarray  # (q, l) dual generators, unit columns
    D: np.ndarray  # (q, r) primal generators, unit columns
    tol: float = TOL_GEOM

    @property
    def dim(self) -> int:
        return self.Z.shape[0]

    @property
    def is_natural(self) -> bool:
        q = self.dim
        if self.Z.shape[1] != q:
            return False
        perm = np.argsort(np.argmax(self.Z, axis=0))
        return bool(np.allclose(self.Z[:, perm], np.eye(q), atol=1e-12))

    def _check(self, *vecs):
        for v in vecs:
            if v.shape != (self.dim,):
                raise DimMismatch(f"expected a vector of length {self.dim}, got shape {v.shape}")

    def leq(self, x, y) -> bool:
        """``x <=_C y``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._check(x, y)
        return bool((self.Z.T @ (y - x) >= -self.tol).all())

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        self._check(x)
        return bool((self.Z.T @ x >= -self.tol).all())

    def in_interior(self, c) -> bool:
        c = np.asarray(c, dtype=float)
        self._check(c)
        return bool((self.Z.T @ c > self.tol * np.linalg.norm(c)).all()) and bool(np.any(c))

    def in_dual(self, w) -> bool:
        """``w in C+``, tested against the primal generators."""
        w = np.asarray(w, dtype=float)
        self._check(w)
        return bool((self.D.T @ w >= -self.tol * max(1.0, np.linalg.norm(w))).all())

    def infimizer_constant(self, c) -> float:
        """Factor ``k`` turning a Hausdorff bound into a shift along ``c``.

        ``k = 1 / min{w.c : w in C+, |w| = 1}``; over a polyhedral ``C+`` the
        minimum sits at one of the unit dual generators.
        """
        c = np.asarray(c, dtype=float)
        self._check(c)
        if abs(np.linalg.norm(c) - 1.0) > 1e-9:
            raise ValueError("direction must have unit norm")
        if not self.in_interior(c):
            raise NotInterior("direction is not in the interior of the cone")
        return float(1.0 / np.min(self.Z.T @ c))

    def interior_direction(self) -> np.ndarray:
        """Normalized sum of the primal generators."""
        s = self.D.sum(axis=1)
        return s / np.linalg.norm(s)

    def to_dict(self) -> dict:
        if self.is_natural:
            return {"natural": self.dim}
        return {"Z": self.Z.tolist()}


def make_cone(Z, tol: float = TOL_GEOM) -> Cone:
    """Validate dual generators ``Z`` (q x l) and enumerate ``C``'s rays."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    q, l = Z.shape
    if q < 2:
        raise DimMismatch("ordering cone needs dimension q >= 2")
    norms = np.linalg.norm(Z, axis=0)
    if np.any(norms == 0):
        raise ValueError("Z has a zero column")
    Z = _dedupe_columns(_unit_columns(Z))
    if Z.shape[1] < q or np.linalg.matrix_rank(Z) < q:
        raise RankDeficient("rank(Z) < q: the cone is not pointed")
    D = DoubleDescription(Z.T, tol=tol).R.T
    if D.shape[1] == 0 or np.linalg.matrix_rank(D) < q:
        raise EmptyInterior("the cone has empty interior")
    D = _dedupe_columns(_unit_columns(D), tol=1e-9)
    return Cone(Z=Z, D=D, tol=tol)


def natural_cone(q: int) -> Cone:
    return make_cone(np.eye(q))


def cone_from_dict(doc: dict) -> Cone:
    if "natural" in doc:
        return natural_cone(int(doc["natural"]))
    if "Z" in doc:
        return make_cone(np.asarray(doc["Z"], dtype=float))
    raise ValueError("cone must be {'natural': q} or {'Z': [[...]]}")
