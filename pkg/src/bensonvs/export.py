"""Static geometry output: OFF meshes (q = 3) and vertex tables."""
from __future__ import annotations

import csv
import io

import numpy as np

from .driver import RunResult
from .errors import WrongDimension
from .polyhedron import Halfspace, Polyhedron


def clipped_mesh(halfspaces: list[Halfspace], points: np.ndarray, margin: float = 1.0):
    """Vertices and faces of ``{w.y >= gamma}`` cut down to a padded bounding box.

    The box spans ``points`` plus ``margin`` on every side.  Faces are
    listed counter-clockwise seen from outside.
    """
    points = np.atleast_2d(points)
    q = points.shape[1]
    if q != 3:
        raise WrongDimension(f"meshes need q = 3, got q = {q}")
    lo = points.min(axis=0) - margin
    hi = points.max(axis=0) + margin
    box = [Halfspace.make(e, lo[i]) for i, e in enumerate(np.eye(3))]
    box += [Halfspace.make(-e, -hi[i]) for i, e in enumerate(np.eye(3))]
    poly = Polyhedron.from_halfspaces(list(halfspaces) + box)
    V = poly.vertices()
    inc = poly.incidence()
    faces = []
    for j, h in enumerate(poly.halfspaces):
        idx = np.flatnonzero(inc[:, j])
        if idx.size < 3:
            continue
        n_out = -h.w
        u = np.cross(n_out, [1.0, 0.0, 0.0])
        if np.linalg.norm(u) < 1e-6:
            u = np.cross(n_out, [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        v = np.cross(n_out, u)
        P = V[idx] - V[idx].mean(axis=0)
        ang = np.arctan2(P @ v, P @ u)
        faces.append([int(i) for i in idx[np.argsort(ang)]])
    return V, faces


def _edges(faces: list[list[int]]) -> set[tuple[int, int]]:
    return {tuple(sorted((f[i], f[(i + 1) % len(f)]))) for f in faces for i in range(len(f))}


def euler_characteristic(n_vertices: int, faces: list[list[int]]) -> int:
    return n_vertices - len(_edges(faces)) + len(faces)


def to_off(V: np.ndarray, faces: list[list[int]]) -> str:
    lines = ["OFF", f"{len(V)} {len(faces)} {len(_edges(faces))}"]
    lines += [" ".join(repr(float(t)) for t in v) for v in V]
    lines += [" ".join(str(t) for t in [len(f), *f]) for f in faces]
    return "\n".join(lines) + "\n"


def result_off(result: RunResult, which: str = "inner", margin: float = 1.0) -> str:
    """OFF text for the inner or outer approximation of a finished run."""
    if result.cone.dim != 3:
        raise WrongDimension(f"OFF export needs q = 3, got q = {result.cone.dim}")
    if which == "inner":
        hs = result.inner().to_halfspaces()
    elif which == "outer":
        hs = result.outer_halfspaces
    else:
        raise ValueError("which must be 'inner' or 'outer'")
    pts = np.vstack([result.inner_vertices, result.outer_vertices])
    V, faces = clipped_mesh(hs, pts, margin)
    chi = euler_characteristic(len(V), faces)
    if chi != 2:
        raise RuntimeError(f"clipped mesh fails the Euler check (V - E + F = {chi})")
    return to_off(V, faces)


def vertices_csv(result: RunResult) -> str:
    q = result.cone.dim
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["set", "index"] + [f"y{i + 1}" for i in range(q)])
    for name, M in (("inner", result.inner_vertices), ("outer", result.outer_vertices)):
        for i, v in enumerate(M):
            w.writerow([name, i] + [repr(float(t)) for t in v])
    return buf.getvalue()
