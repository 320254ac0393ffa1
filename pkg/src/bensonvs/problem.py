"""Convex vector programs built from a small catalog of atoms.

Every objective and constraint is an :class:`Atom`.  Scalarizations are
compiled into :class:`ScalarProgram` instances whose rows are convex
quadratic (or affine) functions of the lifted variable vector; nonsmooth
atoms are replaced by epigraph variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone import Cone, cone_from_dict
from .errors import (
    DimMismatch,
    NonsmoothWithGeneralCone,
    NotPSD,
    SchemaError,
    WeightNotInDualCone,
    ZeroDirection,
)

ATOM_KINDS = ("affine", "quadratic", "sq_residual", "l1_affine", "linf_affine")
NONSMOOTH = ("l1_affine", "linf_affine")


def _psd(Q: np.ndarray, what: str = "Q") -> None:
    if not np.allclose(Q, Q.T, atol=1e-12 * max(1.0, np.abs(Q).max())):
        raise NotPSD(f"{what} is not symmetric")
    lam = np.linalg.eigvalsh(Q)
    if lam.size and lam.min() < -1e-10 * max(1.0, np.abs(lam).max()):
        raise NotPSD(f"{what} has negative eigenvalue {lam.min():.3g}")


@dataclass(frozen=True, eq=False)
class Atom:
    """A scalar convex function of ``x``.

    ``affine``       c.x + r
    ``quadratic``    x'Qx/2 + c.x + r
    ``sq_residual``  |Ax - b|^2
    ``l1_affine``    |Ax - b|_1
    ``linf_affine``  max_i |A_i x - b_i|
    """

    kind: str
    n: int
    Q: np.ndarray | None = None
    c: np.ndarray | None = None
    r: float = 0.0
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    @property
    def smooth(self) -> bool:
        return self.kind not in NONSMOOTH

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return float(self.c @ x + self.r)
        if self.kind == "quadratic":
            return float(0.5 * x @ self.Q @ x + self.c @ x + self.r)
        res = self.A @ x - self.b
        if self.kind == "sq_residual":
            return float(res @ res)
        if self.kind == "l1_affine":
            return float(np.abs(res).sum())
        return float(np.abs(res).max())

    def quad(self) -> tuple[np.ndarray | None, np.ndarray, float]:
        """``(Q, a, r)`` with value ``x'Qx/2 + a.x + r``; smooth atoms only."""
        if self.kind == "affine":
            return None, self.c, self.r
        if self.kind == "quadratic":
            return self.Q, self.c, self.r
        if self.kind == "sq_residual":
            return 2.0 * self.A.T @ self.A, -2.0 * self.A.T @ self.b, float(self.b @ self.b)
        raise ValueError(f"{self.kind} has no quadratic form")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "affine":
            d.update(c=self.c.tolist(), r=self.r)
        elif self.kind == "quadratic":
            d.update(Q=self.Q.tolist(), c=self.c.tolist(), r=self.r)
        else:
            d.update(A=self.A.tolist(), b=self.b.tolist())
        return d


def affine(c, r: float = 0.0) -> Atom:
    c = np.asarray(c, dtype=float).ravel()
    return Atom("affine", c.size, c=c, r=float(r))


def quadratic(Q, c=None, r: float = 0.0) -> Atom:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[0]
    if Q.shape != (n, n):
        raise DimMismatch("Q must be square")
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float).ravel()
    if c.size != n:
        raise DimMismatch("c does not match Q")
    _psd(Q)
    return Atom("quadratic", n, Q=Q, c=c, r=float(r))


def _matrix_atom(kind: str, A, b=None) -> Atom:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise DimMismatch("b does not match the rows of A")
    return Atom(kind, A.shape[1], A=A, b=b)


def sq_residual(A, b=None) -> Atom:
    return _matrix_atom("sq_residual", A, b)


def l1_affine(A, b=None) -> Atom:
    return _matrix_atom("l1_affine", A, b)


def linf_affine(A, b=None) -> Atom:
    return _matrix_atom("linf_affine", A, b)


def atom_from_dict(d: dict) -> Atom:
    try:
        kind = d["kind"]
        if kind == "affine":
            return affine(d["c"], d.get("r", 0.0))
        if kind == "quadratic":
            return quadratic(d["Q"], d.get("c"), d.get("r", 0.0))
        if kind in ("sq_residual", "l1_affine", "linf_affine"):
            return _matrix_atom(kind, d["A"], d.get("b"))
    except KeyError as exc:
        raise SchemaError(f"atom is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NotPSD):
            raise
        raise SchemaError(f"malformed atom: {exc}") from exc
    raise SchemaError(f"unknown atom kind {d.get('kind')!r}")


@dataclass(eq=False)
class VCP:
    """``min F(x)`` w.r.t. the cone order subject to ``g(x) <= 0``, box and ``Ex = f``."""

    n: int
    cone: Cone
    objectives: list[Atom]
    constraints: list[tuple[Atom, float]] = field(default_factory=list)
    box: tuple[np.ndarray, np.ndarray] | None = None
    eq: tuple[np.ndarray, np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.objectives) != self.cone.dim:
            raise DimMismatch(f"{len(self.objectives)} objectives for a cone of dimension {self.cone.dim}")
        for a in self.objectives + [a for a, _ in self.constraints]:
            if a.n != self.n:
                raise DimMismatch(f"atom over {a.n} variables in a problem with n={self.n}")
        if not self.cone.is_natural and any(not a.smooth for a in self.objectives):
            raise NonsmoothWithGeneralCone("nonsmooth objectives require the natural order")
        # C-convexity: every row z_j'F must be convex
        if not self.cone.is_natural:
            for j, z in enumerate(self.cone.Z.T):
                H = np.zeros((self.n, self.n))
                for zi, a in zip(z, self.objectives):
                    Q, _, _ = a.quad()
                    if Q is not None:
                        H += zi * Q
                _psd(H, f"Hessian of objective row z_{j}'F")
        if self.box is not None:
            lo, hi = (np.broadcast_to(np.asarray(v, dtype=float), (self.n,)).copy() for v in self.box)
            if np.any(lo > hi):
                raise SchemaError("box has lo > hi")
            self.box = (lo, hi)
        if self.eq is not None:
            E = np.atleast_2d(np.asarray(self.eq[0], dtype=float))
            f = np.asarray(self.eq[1], dtype=float).ravel()
            if E.shape != (f.size, self.n):
                raise DimMismatch("equality constraint shapes do not match")
            self.eq = (E, f)

    @property
    def q(self) -> int:
        return self.cone.dim

    def F(self, x) -> np.ndarray:
        x = self._vec(x)
        return np.array([a.value(x) for a in self.objectives])

    def g(self, x) -> np.ndarray:
        x = self._vec(x)
        return np.array([a.value(x) - ub for a, ub in self.constraints])

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        return self.F(x), self.g(x)

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimMismatch(f"expected x of length {self.n}, got {x.shape}")
        return x

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "cone": self.cone.to_dict(),
            "objectives": [a.to_dict() for a in self.objectives],
            "constraints": [{"atom": a.to_dict(), "ub": ub} for a, ub in self.constraints],
        }
        if self.eq is not None:
            d["eq"] = {"E": self.eq[0].tolist(), "f": self.eq[1].tolist()}
        if self.box is not None:
            d["box"] = {"lo": _finite_list(self.box[0]), "hi": _finite_list(self.box[1])}
        if self.meta:
            d["instance"] = self.meta
        return d


def _finite_list(v: np.ndarray) -> list:
    return [float(t) if np.isfinite(t) else ("inf" if t > 0 else "-inf") for t in v]


def _bound(v, n: int, default: float) -> np.ndarray:
    if v is None:
        return np.full(n, default)
    if not isinstance(v, list):
        return np.full(n, float(v))
    return np.array([default if t is None else float(t) for t in v], dtype=float)


def load_problem(doc: dict) -> VCP:
    """Build a validated :class:`VCP` from a problem document."""
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be an object")
    for key in ("n", "cone", "objectives"):
        if key not in doc:
            raise SchemaError(f"problem document is missing {key!r}")
    try:
        n = int(doc["n"])
        cone = cone_from_dict(doc["cone"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (NotPSD,)):
            raise
        raise SchemaError(str(exc)) from exc
    objectives = [atom_from_dict(a) for a in doc["objectives"]]
    constraints = []
    for c in doc.get("constraints", []):
        if "atom" not in c:
            raise SchemaError("constraint entries need an 'atom'")
        constraints.append((atom_from_dict(c["atom"]), float(c.get("ub", 0.0))))
    box = None
    if "box" in doc and doc["box"] is not None:
        box = (_bound(doc["box"].get("lo"), n, -np.inf), _bound(doc["box"].get("hi"), n, np.inf))
    eq = None
    if "eq" in doc and doc["eq"] is not None:
        eq = (np.asarray(doc["eq"]["E"], dtype=float), np.asarray(doc["eq"]["f"], dtype=float))
    try:
        return VCP(n, cone, objectives, constraints, box, eq, meta=dict(doc.get("instance", {})))
    except DimMismatch as exc:
        raise SchemaError(str(exc)) from exc


# -- compiled scalar programs ----------------------------------------------


@dataclass(eq=False)
class QuadForm:
    """``y'Qy/2 + a.y + r`` over the lifted variables (``Q`` may be ``None``)."""

    Q: np.ndarray | None
    a: np.ndarray
    r: float = 0.0

    def value(self, y: np.ndarray) -> float:
        v = self.a @ y + self.r
        if self.Q is not None:
            v += 0.5 * y @ self.Q @ y
        return float(v)

    def grad(self, y: np.ndarray) -> np.ndarray:
        return self.a if self.Q is None else self.a + self.Q @ y

    def __add__(self, other: "QuadForm") -> "QuadForm":
        if self.Q is None:
            Q = other.Q
        elif other.Q is None:
            Q = self.Q
        else:
            Q = self.Q + other.Q
        return QuadForm(Q, self.a + other.a, self.r + other.r)

    def scaled(self, s: float) -> "QuadForm":
        return QuadForm(None if self.Q is None else s * self.Q, s * self.a, s * self.r)


@dataclass(eq=False)
class ScalarProgram:
    """``min obj(y)`` s.t. ``rows[i](y) <= 0`` and ``E y = f``.

    ``tags`` label each row: ``"g"`` (problem constraint, one per
    constraint atom), ``"Z<j>"`` (order row of the second scalarization),
    ``"lift"`` (epigraph rows) or ``"box"``.
    """

    kind: str
    nvar: int
    n: int
    objective: QuadForm
    rows: list[QuadForm]
    tags: list[str]
    E: np.ndarray
    f: np.ndarray
    z_index: int | None = None
    lifts: list[tuple[str, Atom, slice]] = field(default_factory=list)

    def row_values(self, y: np.ndarray) -> np.ndarray:
        return np.array([r.value(y) for r in self.rows])

    def tag_indices(self, prefix: str) -> np.ndarray:
        return np.array([i for i, t in enumerate(self.tags) if t == prefix or (prefix == "Z" and t.startswith("Z"))], dtype=int)

    def lift_point(self, x: np.ndarray, z: float | None = None, margin: float = 1.0) -> np.ndarray:
        """Lifted vector for ``x`` with epigraph variables ``margin`` above their atoms."""
        y = np.zeros(self.nvar)
        y[: self.n] = x
        for kind, atom, sl in self.lifts:
            res = np.abs(atom.A @ x - atom.b)
            y[sl] = res + margin if kind == "l1" else res.max() + margin
        if self.z_index is not None and z is not None:
            y[self.z_index] = z
        return y


class _Builder:
    def __init__(self, vcp: VCP, with_z: bool, used_objectives=()):
        self.vcp = vcp
        n = vcp.n
        self.n = n
        # one epigraph block per nonsmooth atom that enters the program; an
        # unused objective block would leave its variables unbounded
        self.nvar = n
        self.blocks: dict[int, tuple[str, Atom, slice]] = {}
        q = len(vcp.objectives)
        atoms = list(vcp.objectives) + [a for a, _ in vcp.constraints]
        for k, a in enumerate(atoms):
            if k < q and k not in used_objectives:
                continue
            if a.kind == "l1_affine":
                sl = slice(self.nvar, self.nvar + a.A.shape[0])
                self.blocks[k] = ("l1", a, sl)
                self.nvar += a.A.shape[0]
            elif a.kind == "linf_affine" and k < len(vcp.objectives):
                sl = slice(self.nvar, self.nvar + 1)
                self.blocks[k] = ("linf", a, sl)
                self.nvar += 1
        self.z_index = None
        if with_z:
            self.z_index = self.nvar
            self.nvar += 1
        self.rows: list[QuadForm] = []
        self.tags: list[str] = []

    def embed(self, Q, a, r) -> QuadForm:
        N = self.nvar
        QQ = None
        if Q is not None:
            QQ = np.zeros((N, N))
            QQ[: self.n, : self.n] = Q
        aa = np.zeros(N)
        aa[: self.n] = a
        return QuadForm(QQ, aa, float(r))

    def linear(self, idx, coef, r=0.0) -> QuadForm:
        a = np.zeros(self.nvar)
        a[idx] = coef
        return QuadForm(None, a, float(r))

    def expr(self, k: int, atom: Atom) -> QuadForm:
        """Smooth or epigraph expression that equals the atom at the optimum."""
        if atom.smooth:
            return self.embed(*atom.quad())
        kind, _, sl = self.blocks[k]
        return self.linear(sl, 1.0)

    def add_lift_rows(self) -> None:
        for k, (kind, atom, sl) in self.blocks.items():
            A, b = atom.A, atom.b
            for i in range(A.shape[0]):
                t_idx = sl.start + i if kind == "l1" else sl.start
                for sgn in (1.0, -1.0):
                    row = self.embed(None, sgn * A[i], -sgn * b[i])
                    row.a[t_idx] -= 1.0
                    self.rows.append(row)
                    self.tags.append("lift")

    def add_constraints(self) -> None:
        vcp = self.vcp
        q = vcp.q
        for k, (atom, ub) in enumerate(vcp.constraints):
            if atom.kind == "linf_affine":
                # max_i |A_i x - b_i| <= ub splits into plain affine rows
                for i in range(atom.A.shape[0]):
                    for sgn in (1.0, -1.0):
                        self.rows.append(self.embed(None, sgn * atom.A[i], -sgn * atom.b[i] - ub))
                        self.tags.append("g")
                continue
            e = self.expr(q + k, atom)
            self.rows.append(QuadForm(e.Q, e.a, e.r - ub))
            self.tags.append("g")
        if vcp.box is not None:
            lo, hi = vcp.box
            for i in range(self.n):
                if np.isfinite(hi[i]):
                    self.rows.append(self.linear(i, 1.0, -hi[i]))
                    self.tags.append("box")
                if np.isfinite(lo[i]):
                    self.rows.append(self.linear(i, -1.0, lo[i]))
                    self.tags.append("box")

    def finish(self, objective: QuadForm) -> ScalarProgram:
        if self.vcp.eq is not None:
            E0, f = self.vcp.eq
            E = np.zeros((E0.shape[0], self.nvar))
            E[:, : self.n] = E0
        else:
            E, f = np.zeros((0, self.nvar)), np.zeros(0)
        if any(r.Q is not None for r in self.rows):
            kind = "SMOOTH"
        elif objective.Q is not None:
            kind = "QP"
        else:
            kind = "LP"
        return ScalarProgram(
            kind, self.nvar, self.n, objective, self.rows, self.tags, E, f,
            z_index=self.z_index, lifts=list(self.blocks.values()),
        )


def compile_p1(vcp: VCP, w) -> ScalarProgram:
    """Weighted-sum scalarization ``min w.F(x)`` over the feasible set."""
    w = np.asarray(w, dtype=float)
    if w.shape != (vcp.q,):
        raise DimMismatch(f"weight must have length {vcp.q}")
    if not np.any(w) or not vcp.cone.in_dual(w):
        raise WeightNotInDualCone("weight must be a nonzero element of the dual cone")
    b = _Builder(vcp, with_z=False, used_objectives={i for i in range(vcp.q) if w[i] != 0})
    obj = QuadForm(None, np.zeros(b.nvar), 0.0)
    for i, atom in enumerate(vcp.objectives):
        if w[i] != 0:
            obj = obj + b.expr(i, atom).scaled(w[i])
    b.add_constraints()
    b.add_lift_rows()
    return b.finish(obj)


def compile_p2(vcp: VCP, v, c) -> ScalarProgram:
    """``min z`` s.t. ``g(x) <= 0`` and ``Z'(F(x) - v - z c) <= 0``."""
    v = np.asarray(v, dtype=float)
    c = np.asarray(c, dtype=float)
    if v.shape != (vcp.q,) or c.shape != (vcp.q,):
        raise DimMismatch(f"v and c must have length {vcp.q}")
    if not np.any(c):
        raise ZeroDirection("direction c must be nonzero")
    b = _Builder(vcp, with_z=True, used_objectives=set(range(vcp.q)))
    b.add_constraints()
    exprs = [b.expr(i, a) for i, a in enumerate(vcp.objectives)]
    Z = vcp.cone.Z
    for j in range(Z.shape[1]):
        row = QuadForm(None, np.zeros(b.nvar), 0.0)
        for i, e in enumerate(exprs):
            if Z[i, j] != 0:
                row = row + e.scaled(Z[i, j])
        row.r -= float(Z[:, j] @ v)
        row.a = row.a.copy()
        row.a[b.z_index] -= float(Z[:, j] @ c)
        b.rows.append(row)
        b.tags.append(f"Z{j}")
    b.add_lift_rows()
    return b.finish(b.linear(b.z_index, 1.0))


def compile_probe(vcp: VCP, direction: Sequence[float]) -> ScalarProgram:
    """``min direction.x`` over the feasible set (boundedness probes)."""
    b = _Builder(vcp, with_z=False)
    b.add_constraints()
    b.add_lift_rows()
    return b.finish(b.embed(None, np.asarray(direction, dtype=float), 0.0))


@dataclass
class AssumptionReport:
    """Outcome of the checkable standing assumptions; failures carry a message."""

    continuity: str = "by construction"
    domains: str = "by construction"
    slater: bool = False
    slater_point: np.ndarray | None = None
    bounded: bool = False
    bounds: np.ndarray | None = None
    cone: bool = False
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.slater and self.bounded and self.cone


def check_assumptions(vcp: VCP) -> AssumptionReport:
    from . import solvers
    from .errors import BensonError

    rep = AssumptionReport()
    cone = vcp.cone
    rep.cone = bool(np.linalg.matrix_rank(cone.Z) == cone.dim and cone.in_interior(cone.interior_direction()))
    if not rep.cone:
        rep.messages.append("ordering cone is not pointed or has empty interior")

    sp = compile_probe(vcp, np.zeros(vcp.n))
    try:
        y = solvers.phase1(sp, optimal=True)
        rep.slater, rep.slater_point = True, y[: vcp.n]
    except BensonError as exc:
        rep.messages.append(f"no strictly feasible point: {exc}")
        return rep

    bounds = np.empty((vcp.n, 2))
    rep.bounded = True
    for i in range(vcp.n):
        for k, sign in enumerate((1.0, -1.0)):
            d = np.zeros(vcp.n)
            d[i] = sign
            probe = compile_probe(vcp, d)
            if not probe.rows:
                rep.bounded = False
                rep.messages.append("feasible set is unbounded (no inequality constraints)")
                rep.bounds = None
                return rep
            try:
                sol = solvers.solve(probe, start=y)
            except BensonError as exc:
                rep.bounded = False
                rep.messages.append(f"coordinate {i} unbounded {'below' if sign > 0 else 'above'}: {exc}")
                continue
            bounds[i, k] = sign * sol.value
    rep.bounds = bounds if rep.bounded else None
    return rep
