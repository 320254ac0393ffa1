"""Test instances: disk, axis-aligned ellipsoids, a 10-bar truss, elastic net.

The disk and ellipsoid instances map the feasible set identically into the
image space, so their upper images have a closed-form membership test;
:func:`oracle_for` returns it for any problem built here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cone import natural_cone
from .errors import BadParameter, BadShape, OracleUnavailable, SingularStiffness
from .problem import VCP, affine, l1_affine, linf_affine, quadratic, sq_residual


# -- ellipsoids and the disk --------------------------------------------------


@dataclass(frozen=True)
class EllipsoidOracle:
    """Upper image of ``{x : sum(((x - center) / radii)**2) <= 1}`` under ``F = id``.

    ``y`` belongs to it iff ``sum((min(y - center, 0) / radii)**2) <= 1``.
    """

    center: np.ndarray
    radii: np.ndarray

    @property
    def dim(self) -> int:
        return self.center.size

    def level(self, y) -> np.ndarray:
        y = np.atleast_2d(y)
        return (np.minimum(y - self.center, 0.0) / self.radii) ** 2 @ np.ones(self.dim)

    def contains(self, y, tol: float = 1e-9) -> bool:
        return bool(self.level(y)[0] <= 1.0 + tol)

    def on_surface(self, x, tol: float = 1e-6) -> bool:
        x = np.asarray(x, dtype=float)
        return abs(float(np.sum(((x - self.center) / self.radii) ** 2)) - 1.0) <= tol

    def sample_boundary(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Points on the boundary of the upper image.

        Three quarters come from the curved part (surface points facing the
        negative orthant); the rest lie on the flat parts where some
        coordinates sit above the center.
        """
        q = self.dim
        n_curved = (3 * n) // 4
        u = -np.abs(rng.standard_normal((n_curved, q)))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        curved = self.center + self.radii * u
        m = n - n_curved
        u = rng.standard_normal((m, q))
        u[:, 0] = -np.abs(u[:, 0])  # at least one negative coordinate
        neg = np.minimum(u, 0.0)
        neg /= np.linalg.norm(neg, axis=1, keepdims=True)
        flat = self.center + self.radii * neg
        lift = (u > 0) * rng.uniform(0.0, 2.0, size=(m, q)) * self.radii
        return np.vstack([curved, flat + lift])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Boundary points plus random nonnegative offsets (points of the upper image)."""
        Y = self.sample_boundary(n, rng)
        return Y + rng.exponential(0.5, size=Y.shape) * (rng.random(Y.shape) < 0.5)


def _ellipsoid_vcp(center, radii, meta) -> VCP:
    center = np.asarray(center, dtype=float)
    radii = np.asarray(radii, dtype=float)
    q = center.size
    Q = 2.0 * np.diag(1.0 / radii**2)
    c = -Q @ center
    r = 0.5 * center @ Q @ center
    return VCP(
        n=q,
        cone=natural_cone(q),
        objectives=[affine(e) for e in np.eye(q)],
        constraints=[(quadratic(Q, c, r), 1.0)],
        meta=meta,
    )


def make_disk() -> VCP:
    """``F = id`` on the unit disk, natural order in the plane."""
    return _ellipsoid_vcp(np.zeros(2), np.ones(2), {"name": "disk"})


def make_ellipsoid(a: float) -> VCP:
    """``F = id`` on the ellipsoid with center ``(1, 1, 1)`` and semi-axes ``(1, a, 5)``."""
    a = float(a)
    if not (a > 0 and np.isfinite(a)):
        raise BadParameter("semi-axis a must be positive")
    return _ellipsoid_vcp(np.ones(3), np.array([1.0, a, 5.0]), {"name": "ellipsoid", "a": a})


def oracle_for(vcp: VCP) -> EllipsoidOracle:
    meta = vcp.meta or {}
    name = meta.get("name")
    if name == "disk":
        return EllipsoidOracle(np.zeros(2), np.ones(2))
    if name == "ellipsoid":
        return EllipsoidOracle(np.ones(3), np.array([1.0, float(meta["a"]), 5.0]))
    raise OracleUnavailable(f"no analytic upper image for instance {name!r}")


# -- truss ----------------------------------------------------------------------


@dataclass(frozen=True)
class TrussParams:
    length: float = 9000.0  # mm
    radius: float = 25.0  # mm
    E: float = 70000.0  # N/mm^2
    load: float = 150000.0  # N, total
    stress: float = 170.0  # N/mm^2, tension and compression
    nonneg_loads: bool = False  # restrict every load component to be >= 0


# supports 0, 1; free nodes 2..5 (in units of the bay length)
TRUSS_NODES = np.array([[0, 1], [0, 0], [1, 1], [1, 0], [2, 1], [2, 0]], dtype=float)
TRUSS_MEMBERS = [
    (0, 2), (2, 4), (1, 3), (3, 5),  # chords
    (2, 3), (4, 5),  # verticals
    (0, 3), (1, 2), (2, 5), (3, 4),  # diagonals
]
_N_SUPPORTS = 2


@dataclass(frozen=True)
class Truss:
    K: np.ndarray  # stiffness on the free degrees of freedom
    T: np.ndarray  # member stress per unit displacement
    params: TrussParams

    def displacements(self, p) -> np.ndarray:
        return np.linalg.solve(self.K, np.asarray(p, dtype=float))

    def stresses(self, p) -> np.ndarray:
        return self.T @ self.displacements(p)


def assemble_truss(params: TrussParams = TrussParams()) -> Truss:
    for name in ("length", "radius", "E", "load", "stress"):
        if not getattr(params, name) > 0:
            raise BadParameter(f"truss parameter {name} must be positive")
    xy = TRUSS_NODES * params.length
    area = np.pi * params.radius**2
    ndof = 2 * (len(xy) - _N_SUPPORTS)
    K = np.zeros((ndof, ndof))
    T = np.zeros((len(TRUSS_MEMBERS), ndof))

    def dofs(node):
        if node < _N_SUPPORTS:
            return [None, None]
        k = 2 * (node - _N_SUPPORTS)
        return [k, k + 1]

    for e, (i, j) in enumerate(TRUSS_MEMBERS):
        d = xy[j] - xy[i]
        L = float(np.linalg.norm(d))
        cs = d / L
        ke = params.E * area / L * np.outer(cs, cs)
        idx = dofs(i) + dofs(j)
        block = np.block([[ke, -ke], [-ke, ke]])
        for a, ia in enumerate(idx):
            if ia is None:
                continue
            for b, ib in enumerate(idx):
                if ib is not None:
                    K[ia, ib] += block[a, b]
        for sign, node in ((-1.0, i), (1.0, j)):
            for comp, k in enumerate(dofs(node)):
                if k is not None:
                    T[e, k] += sign * params.E / L * cs[comp]
    if np.linalg.cond(K) > 1e12:
        raise SingularStiffness("stiffness matrix is singular; the truss is a mechanism")
    return Truss(K, T, params)


def make_truss(params: TrussParams | None = None) -> VCP:
    """Load distribution ``p`` on the free nodes; minimize each node's largest displacement."""
    params = params or TrussParams()
    truss = assemble_truss(params)
    Kinv = np.linalg.inv(truss.K)
    objectives = [linf_affine(Kinv[2 * i : 2 * i + 2]) for i in range(4)]
    S = truss.T @ Kinv
    constraints = [(affine(row), params.stress) for row in S] + [(affine(-row), params.stress) for row in S]
    n = Kinv.shape[0]
    return VCP(
        n=n,
        cone=natural_cone(4),
        objectives=objectives,
        constraints=constraints,
        eq=(np.ones((1, n)), np.array([params.load])),
        box=(np.zeros(n), np.full(n, np.inf)) if params.nonneg_loads else None,
        meta={"name": "truss", **params.__dict__},
    )


# -- elastic net ------------------------------------------------------------------


def standardize(A, b) -> tuple[np.ndarray, np.ndarray]:
    """Center ``b``; center the columns of ``A`` and scale them to unit sum of squares."""
    A = np.asarray(A, dtype=float)
    A = A - A.mean(axis=0)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise BadShape("a predictor column is constant")
    b = np.asarray(b, dtype=float)
    return A / norms, b - b.mean()


def make_elastic_net(m: int, n: int, seed: int = 0) -> VCP:
    """Synthetic elastic-net trade-off: residual, l1 norm and squared l2 norm."""
    if m < 2 or n < 1:
        raise BadShape("need m >= 2 observations and n >= 1 predictors")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    support = rng.choice(n, size=max(1, n // 10), replace=False)
    x_true[support] = rng.standard_normal(support.size) * 2.0
    b = A @ x_true + 0.1 * rng.standard_normal(m)
    A, b = standardize(A, b)
    x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
    R = 10.0 * max(float(np.abs(x_ls).max()), 1.0)
    return VCP(
        n=n,
        cone=natural_cone(3),
        objectives=[sq_residual(A, b), l1_affine(np.eye(n)), quadratic(2.0 * np.eye(n))],
        box=(-R * np.ones(n), R * np.ones(n)),
        meta={"name": "enet", "m": m, "n": n, "seed": seed},
    )


INSTANCES = ("disk", "ellipsoid", "truss", "enet")


def make_instance(name: str, **params) -> VCP:
    if name == "disk":
        return make_disk()
    if name == "ellipsoid":
        return make_ellipsoid(params.get("a", 7.0))
    if name == "truss":
        kw = {k: float(v) for k, v in params.items() if k in ("length", "radius", "E", "load", "stress") and v is not None}
        return make_truss(TrussParams(**kw, nonneg_loads=bool(params.get("nonneg_loads", False))))
    if name == "enet":
        return make_elastic_net(int(params.get("m", 20)), int(params.get("n", 50)), int(params.get("seed", 1)))
    raise BadParameter(f"unknown instance {name!r}; choose from {', '.join(INSTANCES)}")
