"""Incremental double description for pointed polyhedral cones.

The cone is ``{x : A x >= 0}`` in ``R^d``; callers scale the rows so that
absolute tolerances are meaningful (unit normals).  Extreme rays are kept as rows of
``R`` together with a boolean incidence matrix ``inc`` (``inc[k, i]`` is true
when ray ``k`` is tight on constraint row ``i``).  Adjacency of two rays is
decided combinatorially: no third ray may be tight on every row the pair
shares.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import EmptyResult, RankDeficient


def _unit(R: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(R, axis=1, keepdims=True)
    return R / np.where(n > 0, n, 1.0)


class DoubleDescription:
    def __init__(
        self,
        A: np.ndarray,
        tol: float = 1e-9,
        normalize: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        m, d = A.shape
        self.d = d
        self.tol = tol
        self.normalize = normalize or _unit

        basis: list[int] = []
        for i in range(m):
            if not np.any(A[i]):
                continue
            cand = A[basis + [i]]
            s = np.linalg.svd(cand, compute_uv=False)
            if s[-1] > 1e-10 * s[0]:
                basis.append(i)
                if len(basis) == d:
                    break
        if len(basis) < d:
            raise RankDeficient(
                f"constraint matrix has rank {len(basis)} < {d}; cone is not pointed"
            )

        B = A[basis]
        self.A = B.copy()
        self.R = self.normalize(np.linalg.inv(B).T.copy())
        self.inc = ~np.eye(d, dtype=bool)
        self.row_ids = list(basis)
        for i in range(m):
            if i not in basis:
                self.add_row(A[i], row_id=i)

    @property
    def n_rays(self) -> int:
        return self.R.shape[0]

    def _scale(self, R: np.ndarray) -> np.ndarray:
        return np.maximum(1.0, np.linalg.norm(R, axis=1))

    def incidence(self, R: np.ndarray) -> np.ndarray:
        vals = R @ self.A.T
        return np.abs(vals) <= self.tol * self._scale(R)[:, None]

    def add_row(self, a: np.ndarray, row_id: int | None = None):
        """Intersect with ``{x : a.x >= 0}``.

        Returns ``None`` when the row cuts nothing (the row is then not
        stored), otherwise ``(keep, n_new)`` where ``keep`` is a mask over
        the old rays and the ``n_new`` new rays sit at the end of ``R``.
        """
        a = np.asarray(a, dtype=float)
        R, inc = self.R, self.inc
        vals = R @ a
        tol = self.tol * self._scale(R)
        pos = vals > tol
        neg = vals < -tol
        zero = ~(pos | neg)
        if not neg.any():
            return None
        if not (pos.any() or zero.any()):
            raise EmptyResult("every generator violates the new constraint")

        P = np.flatnonzero(pos)
        N = np.flatnonzero(neg)
        new_rays = []
        new_inc = []
        if P.size and N.size:
            ii = inc.astype(np.int32)
            counts = ii[P] @ ii[N].T
            cand = np.argwhere(counts >= self.d - 2)
            for pi, ni in cand:
                i, j = P[pi], N[ni]
                common = inc[i] & inc[j]
                if common.any():
                    sup = inc[:, common].all(axis=1)
                    if sup.sum() > 2:
                        continue
                r = vals[i] * R[j] - vals[j] * R[i]
                new_rays.append(r)
                new_inc.append(common)

        keep = pos | zero
        if new_rays:
            NR = self.normalize(np.array(new_rays))
            NI = np.array(new_inc) | self.incidence(NR)
            # collapse numerically identical rays produced by degenerate cuts
            order: list[int] = []
            for k in range(NR.shape[0]):
                dup = False
                for o in order:
                    if np.linalg.norm(NR[k] - NR[o]) <= 1e3 * self.tol * max(1.0, np.linalg.norm(NR[o])):
                        NI[o] |= NI[k]
                        dup = True
                        break
                if not dup:
                    order.append(k)
            NR, NI = NR[order], NI[order]
        else:
            NR = np.zeros((0, self.d))
            NI = np.zeros((0, inc.shape[1]), dtype=bool)

        self.R = np.vstack([R[keep], NR])
        old_inc = inc[keep]
        col_old = zero[keep]
        self.inc = np.hstack(
            [np.vstack([old_inc, NI]), np.concatenate([col_old, np.ones(NR.shape[0], bool)])[:, None]]
        )
        self.A = np.vstack([self.A, a])
        self.row_ids.append(row_id)
        return keep, NR.shape[0]


def extreme_rays(A: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Unit extreme rays (as rows) of the pointed cone ``{x : A x >= 0}``."""
    return DoubleDescription(A, tol=tol).R
