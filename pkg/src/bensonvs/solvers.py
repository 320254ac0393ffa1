"""Scalar solvers for compiled programs and the image-space projection.

* :func:`solve_lp` wraps HiGHS (through :func:`scipy.optimize.linprog`) and
  returns row multipliers.
* :func:`solve_smooth` is a log-barrier Newton method for programs with
  convex quadratic objective and rows; multipliers come from the final
  barrier weights ``u_i = mu / slack_i``.
* :func:`project_onto_inner` computes the Euclidean projection onto
  ``conv V + cone D`` by a primal active-set method.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, nnls

from .config import TOL_FEAS, TOL_GAP, TOL_GEOM, TOL_KKT
from .cone import Cone
from .errors import DualDegenerate, Infeasible, LineSearchFail, MaxIter, Unbounded
from .problem import QuadForm, ScalarProgram

log = logging.getLogger(__name__)

OPTIMAL, INFEASIBLE, UNBOUNDED, MAXITER = "Optimal", "Infeasible", "Unbounded", "MaxIter"


@dataclass
class ScalarSolution:
    x: np.ndarray
    y: np.ndarray
    value: float
    multipliers: np.ndarray
    tags: list[str]
    z: float | None = None
    status: str = OPTIMAL
    iterations: int = 0

    @property
    def u(self) -> np.ndarray:
        """Multipliers of the problem-constraint rows."""
        return self.multipliers[[i for i, t in enumerate(self.tags) if t == "g"]]

    @property
    def uZ(self) -> np.ndarray:
        """Multipliers of the order rows ``Z0, Z1, ...`` in generator order."""
        idx = sorted((int(t[1:]), i) for i, t in enumerate(self.tags) if t.startswith("Z"))
        return self.multipliers[[i for _, i in idx]]


def solve(sp: ScalarProgram, start: np.ndarray | None = None, tol_gap: float = TOL_GAP) -> ScalarSolution:
    """Dispatch on the program class."""
    if sp.kind == "LP":
        return solve_lp(sp)
    return solve_smooth(sp, start=start, tol_gap=tol_gap)


# -- linear programs --------------------------------------------------------


def solve_lp(sp: ScalarProgram, tol_feas: float = TOL_FEAS) -> ScalarSolution:
    if sp.kind != "LP":
        raise ValueError(f"solve_lp needs an LP, got {sp.kind}")
    A_ub = np.array([r.a for r in sp.rows]).reshape(-1, sp.nvar)
    b_ub = -np.array([r.r for r in sp.rows])
    res = linprog(
        sp.objective.a,
        A_ub=A_ub if len(sp.rows) else None,
        b_ub=b_ub if len(sp.rows) else None,
        A_eq=sp.E if sp.E.shape[0] else None,
        b_eq=sp.f if sp.E.shape[0] else None,
        bounds=[(None, None)] * sp.nvar,
        method="highs",
        options={"primal_feasibility_tolerance": min(tol_feas, 1e-9), "dual_feasibility_tolerance": 1e-9},
    )
    if res.status == 2:
        raise Infeasible(res.message)
    if res.status == 3:
        raise Unbounded(res.message)
    if res.status != 0:
        raise MaxIter(res.message)
    y = res.x
    u = -np.asarray(res.ineqlin.marginals) if len(sp.rows) else np.zeros(0)
    return ScalarSolution(
        x=y[: sp.n].copy(),
        y=y,
        value=float(res.fun + sp.objective.r),
        multipliers=np.maximum(u, 0.0),
        tags=list(sp.tags),
        z=None if sp.z_index is None else float(y[sp.z_index]),
        iterations=int(getattr(res, "nit", 0)),
    )


# -- barrier Newton ---------------------------------------------------------


class _Rows:
    """Vectorized evaluation of a list of quadratic rows."""

    def __init__(self, rows: list[QuadForm], nvar: int):
        self.m = len(rows)
        self.nvar = nvar
        self.aff = np.array([i for i, r in enumerate(rows) if r.Q is None], dtype=int)
        self.quad = [(i, r) for i, r in enumerate(rows) if r.Q is not None]
        self.Ga = np.array([rows[i].a for i in self.aff]).reshape(-1, nvar)
        self.ha = np.array([rows[i].r for i in self.aff])

    def values(self, y: np.ndarray) -> np.ndarray:
        out = np.empty(self.m)
        if self.aff.size:
            out[self.aff] = self.Ga @ y + self.ha
        for i, r in self.quad:
            out[i] = r.value(y)
        return out

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        J = np.empty((self.m, self.nvar))
        if self.aff.size:
            J[self.aff] = self.Ga
        for i, r in self.quad:
            J[i] = r.a + r.Q @ y
        return J

    def weighted_hessian(self, wts: np.ndarray) -> np.ndarray:
        H = np.zeros((self.nvar, self.nvar))
        for i, r in self.quad:
            H += wts[i] * r.Q
        return H


def _kkt_solve(H, g, E):
    N = H.shape[0]
    k = E.shape[0]
    if k == 0:
        try:
            return np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(H, -g, rcond=None)[0]
    M = np.zeros((N + k, N + k))
    M[:N, :N] = H
    M[:N, N:] = E.T
    M[N:, :N] = E
    rhs = np.concatenate([-g, np.zeros(k)])
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:N]


def _barrier(
    obj: QuadForm,
    rows: list[QuadForm],
    E: np.ndarray,
    y0: np.ndarray,
    tol_gap: float,
    stop=None,
    max_newton: int = 200,
    max_total: int = 5000,
):
    """Path-following from the strictly feasible ``y0``; returns ``(y, t, iters)``."""
    R = _Rows(rows, y0.size)
    m = R.m
    y = y0.copy()
    t = 1.0
    total = 0
    alpha, beta = 0.01, 0.5
    obj_Q = obj.Q

    def phi(yy, t):
        f = R.values(yy)
        if np.any(f >= 0):
            return np.inf
        return t * obj.value(yy) - np.log(-f).sum()

    def dphi(yy, t):
        return t * obj.grad(yy) + R.jacobian(yy).T @ (-1.0 / R.values(yy))

    if m == 0:
        raise ValueError("barrier method needs at least one inequality row")
    while True:
        for _ in range(max_newton):
            total += 1
            if total > max_total:
                raise MaxIter("barrier method exceeded its Newton iteration budget")
            f = R.values(y)
            s = -f
            J = R.jacobian(y)
            inv = 1.0 / s
            g = t * obj.grad(y) + J.T @ inv
            H = (J * (inv**2)[:, None]).T @ J + R.weighted_hessian(inv)
            if obj_Q is not None:
                H = H + t * obj_Q
            dy = _kkt_solve(H, g, E)
            lam2 = float(-g @ dy)
            if lam2 / 2.0 <= 1e-11:
                break
            step = 1.0
            phi0 = phi(y, t)
            while True:
                yn = y + step * dy
                val = phi(yn, t)
                if val <= phi0 - alpha * step * lam2:
                    break
                # at large t the Armijo test drowns in rounding; a non-positive slope at the
                # trial point also certifies descent because phi is convex along the line
                if np.isfinite(val) and dphi(yn, t) @ dy <= 0:
                    break
                step *= beta
                if step < 1e-14:
                    break
            if step < 1e-14:
                if lam2 < 1e-6:
                    break
                raise LineSearchFail(f"no descent along the Newton direction (lambda^2={lam2:.3g})")
            y = yn
            if not np.all(np.isfinite(y)) or np.linalg.norm(y) > 1e12:
                raise Unbounded("iterates diverge; the program appears unbounded")
            if stop is not None and stop(y, t, centered=False):
                return y, t, total
        if stop is not None and stop(y, t, centered=True):
            return y, t, total
        if m / t <= tol_gap:
            return y, t, total
        t *= 10.0


def phase1(sp: ScalarProgram, optimal: bool = False, y0: np.ndarray | None = None) -> np.ndarray:
    """Strictly feasible lifted point: every row value negative, ``E y = f``.

    Solves ``min s`` s.t. ``rows(y) <= s``, ``s >= -1``.  With ``optimal`` the
    solve runs to convergence (a max-min-slack point); otherwise it stops as
    soon as the slack is comfortably negative.
    """
    N = sp.nvar
    if y0 is None:
        if sp.E.shape[0]:
            y0 = np.linalg.lstsq(sp.E, sp.f, rcond=None)[0]
            if np.linalg.norm(sp.E @ y0 - sp.f) > 1e-8 * max(1.0, np.linalg.norm(sp.f)):
                raise Infeasible("equality constraints are inconsistent")
        else:
            y0 = np.zeros(N)
    if not sp.rows:
        return y0
    f0 = sp.row_values(y0)
    if not optimal and np.all(f0 < 0):
        return y0
    s0 = max(float(f0.max()), -0.5) + 1.0

    def lift(r: QuadForm) -> QuadForm:
        Q = None
        if r.Q is not None:
            Q = np.zeros((N + 1, N + 1))
            Q[:N, :N] = r.Q
        return QuadForm(Q, np.append(r.a, -1.0), r.r)

    rows = [lift(r) for r in sp.rows]
    rows.append(QuadForm(None, np.append(np.zeros(N), -1.0), -1.0))
    # a faint proximal term keeps the auxiliary program bounded in free directions
    reg = 1e-8
    Qp = np.zeros((N + 1, N + 1))
    Qp[:N, :N] = 2 * reg * np.eye(N)
    obj = QuadForm(Qp, np.append(-2 * reg * y0, 1.0), reg * float(y0 @ y0))
    E = np.hstack([sp.E, np.zeros((sp.E.shape[0], 1))])

    def stop(yy, t, centered):
        if optimal:
            return False
        return yy[-1] < -1e-3 or (centered and yy[-1] < 0)

    try:
        ys, _, _ = _barrier(obj, rows, E, np.append(y0, s0), tol_gap=1e-9 if optimal else 1e-7, stop=stop)
    except Unbounded as exc:
        raise Infeasible(f"phase 1 failed: {exc}") from exc
    if ys[-1] >= -1e-10:
        raise Infeasible(f"no strictly feasible point (best max row value {ys[-1]:.3g})")
    return ys[:-1]


def p2_start(sp: ScalarProgram, x) -> np.ndarray:
    """Lifted point at ``x`` with ``z`` just large enough to make the order rows strict.

    Other rows are left as they are; the caller's solve falls back to phase 1
    (seeded here) when the point is not strictly feasible.
    """
    x = np.asarray(x, dtype=float)
    scale = max(1.0, float(np.abs(x).max()))
    y = sp.lift_point(x, 0.0, margin=1e-4 * scale)
    vals = sp.row_values(y)
    zc = np.array([r.a[sp.z_index] for r in sp.rows])
    need = [vals[i] / -zc[i] for i in sp.tag_indices("Z") if zc[i] < 0]
    z = max(need, default=0.0)
    y[sp.z_index] = z + 1e-3 * max(1.0, abs(z))
    return y


def solve_smooth(
    sp: ScalarProgram, start: np.ndarray | None = None, tol_gap: float = TOL_GAP
) -> ScalarSolution:
    if sp.kind not in ("QP", "SMOOTH"):
        raise ValueError(f"solve_smooth needs a QP or SMOOTH program, got {sp.kind}")
    if start is not None and sp.E.shape[0]:
        if np.linalg.norm(sp.E @ start - sp.f) > 1e-9 * max(1.0, np.linalg.norm(sp.f)):
            start = None
    if start is None or np.any(sp.row_values(start) >= 0):
        start = phase1(sp, y0=start)
    y, t, iters = _barrier(sp.objective, sp.rows, sp.E, start, tol_gap=tol_gap)
    s = -sp.row_values(y)
    u = _polish(sp, y, 1.0 / (t * s), s)
    return ScalarSolution(
        x=y[: sp.n].copy(),
        y=y,
        value=sp.objective.value(y),
        multipliers=u,
        tags=list(sp.tags),
        z=None if sp.z_index is None else float(y[sp.z_index]),
        iterations=iters,
    )


def _stationarity(sp: ScalarProgram, y, u) -> float:
    J = _Rows(sp.rows, sp.nvar).jacobian(y)
    r = sp.objective.grad(y) + J.T @ u
    if sp.E.shape[0]:
        r = r - sp.E.T @ np.linalg.lstsq(sp.E.T, r, rcond=None)[0]
    return float(np.linalg.norm(r))


def _polish(sp: ScalarProgram, y, u, s) -> np.ndarray:
    """Refit multipliers of the nearly active rows by nonnegative least squares.

    Barrier weights ``mu / slack`` inherit the rounding error of slacks that
    are only a few ulps above zero; solving stationarity directly is exact
    up to the accuracy of ``y``.
    """
    active = np.flatnonzero(s <= 1e-4 * max(1.0, float(s.max())))
    if active.size == 0:
        return u
    J = _Rows(sp.rows, sp.nvar).jacobian(y)
    M = [J[active].T]
    if sp.E.shape[0]:
        M += [sp.E.T, -sp.E.T]
    M = np.hstack(M)
    sol, _ = nnls(M, -sp.objective.grad(y), maxiter=50 * M.shape[1])
    cand = np.zeros_like(u)
    cand[active] = sol[: active.size]
    if _stationarity(sp, y, cand) <= _stationarity(sp, y, u):
        return cand
    return u


def kkt_residuals(sp: ScalarProgram, sol: ScalarSolution) -> dict[str, float]:
    """Stationarity, complementarity and feasibility residuals of a solution."""
    y = sol.y
    f = sp.row_values(y)
    J = _Rows(sp.rows, sp.nvar).jacobian(y) if sp.rows else np.zeros((0, sp.nvar))
    r = sp.objective.grad(y) + J.T @ sol.multipliers
    if sp.E.shape[0]:
        nu = np.linalg.lstsq(sp.E.T, -r, rcond=None)[0]
        r = r + sp.E.T @ nu
        eq = float(np.abs(sp.E @ y - sp.f).max())
    else:
        eq = 0.0
    return {
        "stationarity": float(np.abs(r).max()) if r.size else 0.0,
        "complementarity": float(np.abs(sol.multipliers * f).max()) if f.size else 0.0,
        "feasibility": max(float(f.max()) if f.size else 0.0, 0.0, eq),
        "dual_sign": float(max(0.0, -sol.multipliers.min())) if f.size else 0.0,
    }


# -- dual weight ------------------------------------------------------------


def raw_dual_weight(sol: ScalarSolution, cone: Cone) -> np.ndarray:
    """``Z uZ`` before any normalization."""
    uZ = sol.uZ
    if uZ.size != cone.Z.shape[1]:
        raise DualDegenerate("solution carries no order-row multipliers")
    return cone.Z @ uZ


def derive_dual_weight(sol: ScalarSolution, cone: Cone, c, tol_kkt: float = TOL_KKT) -> np.ndarray:
    """Hyperplane normal ``w = Z uZ`` from a solved second scalarization.

    Stationarity in ``z`` gives ``w.c = 1``; the recovered weight is rescaled
    so that this holds exactly.
    """
    c = np.asarray(c, dtype=float)
    w = raw_dual_weight(sol, cone)
    if np.linalg.norm(w) < TOL_GEOM:
        raise DualDegenerate("recovered weight vanishes")
    wc = float(w @ c)
    if abs(wc - 1.0) > 1e-5:
        raise DualDegenerate(f"w.c = {wc:.8g} violates the z-stationarity condition")
    return w / wc


# -- projection onto conv V + cone D -----------------------------------------


@dataclass
class Projection:
    point: np.ndarray
    dist: float
    lam: np.ndarray
    mu: np.ndarray
    iterations: int = 0
    kkt: float = field(default=0.0)


def _affine_ls(G, is_point, F, s):
    """Minimize |G_F y - s| subject to sum of point coefficients = 1."""
    F = list(F)
    pts = [j for j in F if is_point[j]]
    i0 = pts[0]
    others = [j for j in F if j != i0]
    base = G[:, i0]
    if not others:
        y = np.zeros(len(F))
        y[F.index(i0)] = 1.0
        return y
    M = np.column_stack([G[:, j] - base if is_point[j] else G[:, j] for j in others])
    coef = np.linalg.lstsq(M, s - base, rcond=None)[0]
    y = np.empty(len(F))
    for k, j in enumerate(others):
        y[F.index(j)] = coef[k]
    y[F.index(i0)] = 1.0 - sum(coef[k] for k, j in enumerate(others) if is_point[j])
    return y


def _independent(G, is_point, F) -> bool:
    H = np.vstack([G[:, F], is_point[F].astype(float)])
    sv = np.linalg.svd(H, compute_uv=False)
    return sv[-1] > 1e-10 * max(1.0, sv[0])


def project_onto_inner(V, D, s, warm: tuple[np.ndarray, np.ndarray] | None = None, max_iter: int = 1000) -> Projection:
    """Projection of ``s`` onto ``conv V + cone D`` (generators as columns).

    Solves ``min |V lam + D mu - s|^2`` s.t. ``sum(lam) = 1``, ``lam, mu >= 0``.
    The working set always holds generators whose homogenized columns
    ``(v, 1)`` / ``(d, 0)`` are linearly independent, so the subproblems have
    unique solutions.  ``warm`` seeds the working set with a previous
    ``(lam, mu)``; missing trailing entries are read as zero.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    s = np.asarray(s, dtype=float)
    q, k = V.shape
    if k == 0:
        raise ValueError("need at least one point")
    D = np.zeros((q, 0)) if D is None else np.asarray(D, dtype=float).reshape(q, -1)
    r = D.shape[1]
    G = np.hstack([V, D])
    N = k + r
    is_point = np.zeros(N, dtype=bool)
    is_point[:k] = True
    scale = max(1.0, float(np.abs(G).max()), float(np.abs(s).max()))
    tol_zero = 1e-13
    tol_opt = 1e-13 * scale * scale

    x = np.zeros(N)
    F: list[int] = []
    if warm is not None:
        lam0, mu0 = warm
        xw = np.zeros(N)
        xw[: min(k, lam0.size)] = lam0[:k]
        xw[k : k + min(r, mu0.size)] = mu0[:r]
        sup = [j for j in range(N) if xw[j] > tol_zero]
        if sup and any(is_point[j] for j in sup) and _independent(G, is_point, sup) and xw[:k].sum() > 0:
            x = xw
            x[:k] /= x[:k].sum()
            F = sup
    if not F:
        j0 = int(np.argmin(np.linalg.norm(V - s[:, None], axis=0)))
        x[j0] = 1.0
        F = [j0]

    it = 0
    last_added = None
    while True:
        # inner loop: move to the optimum over the span of F, dropping generators that hit zero
        while True:
            it += 1
            if it > max_iter:
                raise MaxIter("projection active-set iteration limit")
            y = _affine_ls(G, is_point, F, s)
            if np.all(y > tol_zero):
                x[:] = 0.0
                x[F] = y
                break
            xf = x[F]
            bad = y <= tol_zero
            ratios = np.where(bad, xf / np.maximum(xf - y, 1e-300), np.inf)
            a = float(min(1.0, ratios.min()))
            xf = xf + a * (y - xf)
            x[:] = 0.0
            keep = [j for j, v in zip(F, xf) if v > tol_zero]
            if not any(is_point[j] for j in keep):
                # keep the largest point coefficient to stay on the simplex
                pts = [(v, j) for j, v in zip(F, xf) if is_point[j]]
                keep.append(max(pts)[1])
                keep.sort()
            x[F] = np.maximum(xf, 0.0)
            x[[j for j in F if j not in keep]] = 0.0
            F = keep
            if x[:k].sum() > 0:
                x[:k] /= x[:k].sum()
        p = G @ x
        grad = G.T @ (p - s)
        pts_in = [j for j in F if is_point[j]]
        nu = -float(np.mean(grad[pts_in]))
        red = grad + nu * is_point
        red[F] = np.inf
        j = int(np.argmin(red))
        if red[j] >= -tol_opt or j == last_added:
            break
        if not _independent(G, is_point, F + [j]):
            break
        F = F + [j]
        last_added = j
        x[j] = 0.0
    p = G @ x
    grad = G.T @ (p - s)
    nu = -float(np.mean(grad[[j for j in F if is_point[j]]]))
    red = grad + nu * is_point
    return Projection(
        point=p,
        dist=float(np.linalg.norm(p - s)),
        lam=x[:k].copy(),
        mu=x[k:].copy(),
        iterations=it,
        kkt=float(max(0.0, -red.min())),
    )
