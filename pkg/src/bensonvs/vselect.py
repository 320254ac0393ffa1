"""Vertex selection: projections of outer vertices onto the inner set.

Each outer vertex ``s`` keeps its projection ``p*`` onto the current inner
approximation.  When the inner set grows by a point ``y``, the old
projection is still optimal iff ``(p* - s).(y - p*) >= 0``, so most entries
survive an update without a new QP.  The largest cached distance is the
Hausdorff distance between the two approximations.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .config import TOL_KKT
from .polyhedron import CutReport, InnerPolyhedron, Polyhedron
from .solvers import Projection, project_onto_inner


@dataclass
class CacheEntry:
    vertex: np.ndarray
    point: np.ndarray
    dist: float
    lam: np.ndarray
    mu: np.ndarray


@dataclass
class ProjectionCache:
    entries: dict[int, CacheEntry] = field(default_factory=dict)
    generation: int = 0
    qp_solved: int = 0
    qp_skipped: int = 0
    last_solved: int = 0
    last_skipped: int = 0
    audit_max: float = 0.0
    audited: int = 0

    def distances(self) -> dict[int, float]:
        return {k: e.dist for k, e in self.entries.items()}


def _solve_batch(jobs_list, inner: InnerPolyhedron, jobs: int) -> list[Projection]:
    V = inner.vertices().T
    D = inner.D

    def one(item):
        s, warm = item
        return project_onto_inner(V, D, s, warm=warm)

    if jobs > 1 and len(jobs_list) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(one, jobs_list))
    return [one(it) for it in jobs_list]


def _store(cache: ProjectionCache, vid: int, s: np.ndarray, pr: Projection) -> None:
    cache.entries[vid] = CacheEntry(s, pr.point, pr.dist, pr.lam, pr.mu)


def fill_cache(cache: ProjectionCache, outer: Polyhedron, inner: InnerPolyhedron, jobs: int = 1) -> None:
    """Solve every projection from scratch."""
    ids = [int(i) for i in outer.vertex_ids()]
    verts = outer.vertices()
    res = _solve_batch([(v, None) for v in verts], inner, jobs)
    cache.entries = {}
    for vid, v, pr in zip(ids, verts, res):
        _store(cache, vid, v, pr)
    cache.last_solved, cache.last_skipped = len(ids), 0
    cache.qp_solved += len(ids)
    cache.generation += 1


def refresh_cache(
    cache: ProjectionCache,
    report: CutReport,
    new_point,
    added: bool,
    outer: Polyhedron,
    inner: InnerPolyhedron,
    tol_kkt: float = TOL_KKT,
    jobs: int = 1,
    audit: bool = False,
) -> tuple[int, int]:
    """Bring the cache in line with the updated outer and inner sets.

    ``added`` says whether ``new_point`` actually entered the inner vertex
    list; when it did not, the inner set is unchanged and every surviving
    entry stays valid.  Returns ``(solved, skipped)`` for this update.
    """
    for vid in report.cut:
        cache.entries.pop(vid, None)
    y = np.asarray(new_point, dtype=float)
    todo: list[tuple[int, np.ndarray, tuple | None]] = []
    retained: list[int] = []
    for vid in report.kept:
        e = cache.entries.get(vid)
        if e is None:
            todo.append((vid, outer.vertex(vid), None))
        elif not added or float((e.point - e.vertex) @ (y - e.point)) >= -tol_kkt:
            retained.append(vid)
        else:
            todo.append((vid, e.vertex, (e.lam, e.mu)))
    for vid in report.new:
        todo.append((vid, outer.vertex(vid), None))
    res = _solve_batch([(s, w) for _, s, w in todo], inner, jobs)
    for (vid, s, _), pr in zip(todo, res):
        _store(cache, vid, s, pr)
    if audit and added and retained:
        fresh = _solve_batch([(cache.entries[v].vertex, None) for v in retained], inner, jobs)
        for vid, pr in zip(retained, fresh):
            cache.audit_max = max(cache.audit_max, abs(pr.dist - cache.entries[vid].dist))
        cache.audited += len(retained)
    cache.last_solved, cache.last_skipped = len(todo), len(retained)
    cache.qp_solved += len(todo)
    cache.qp_skipped += len(retained)
    cache.generation += 1
    return len(todo), len(retained)


def hausdorff(cache: ProjectionCache) -> float:
    return max((e.dist for e in cache.entries.values()), default=0.0)


def select_vertex(cache: ProjectionCache, exclude=()) -> tuple[int, np.ndarray, np.ndarray, float]:
    """Farthest vertex ``(id, s, p*, dist)``; ties go to the lowest id.

    Vertices in ``exclude`` are not eligible.  The Hausdorff distance is
    :func:`hausdorff` of the cache, regardless of ``exclude``.
    """
    best = None
    for vid in sorted(cache.entries):
        if vid in exclude:
            continue
        e = cache.entries[vid]
        if best is None or e.dist > best[3]:
            best = (vid, e.vertex, e.point, e.dist)
    if best is None:
        raise LookupError("no eligible vertex")
    return best


# -- brute-force oracle -----------------------------------------------------


def project_bruteforce(V, D, s) -> tuple[np.ndarray, float]:
    """Projection onto ``conv V + cone D`` by enumerating support sets.

    Every subset of generators with affinely independent homogenized
    columns is solved as an equality-constrained least-squares problem; the
    closest nonnegative solution wins.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    q, k = V.shape
    D = np.zeros((q, 0)) if D is None else np.asarray(D, dtype=float).reshape(q, -1)
    G = np.hstack([V, D])
    e = np.r_[np.ones(k), np.zeros(D.shape[1])]
    s = np.asarray(s, dtype=float)
    best_p, best_d = None, np.inf
    for size in range(1, min(q + 1, G.shape[1]) + 1):
        for F in combinations(range(G.shape[1]), size):
            F = list(F)
            if e[F].sum() == 0:
                continue
            H = np.vstack([G[:, F], e[F]])
            if np.linalg.matrix_rank(H, tol=1e-10) < size:
                continue
            GF = G[:, F]
            K = np.zeros((size + 1, size + 1))
            K[:size, :size] = GF.T @ GF
            K[:size, size] = e[F]
            K[size, :size] = e[F]
            rhs = np.r_[GF.T @ s, 1.0]
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            coef = sol[:size]
            if coef.min() < -1e-11:
                continue
            p = GF @ coef
            d = float(np.linalg.norm(p - s))
            if d < best_d:
                best_p, best_d = p, d
    return best_p, best_d


def hausdorff_bruteforce(outer: Polyhedron, inner: InnerPolyhedron) -> float:
    """Largest oracle projection distance over the outer vertices."""
    V, D = inner.vertices().T, inner.D
    return max(project_bruteforce(V, D, v)[1] for v in outer.vertices())
