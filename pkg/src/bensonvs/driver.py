"""Outer/inner approximation of the upper image.

:func:`run` refines the outer approximation at the vertex farthest from the
inner approximation until the Hausdorff distance between them drops to
``epsilon``.  :func:`run_baseline` picks vertices in creation order (or at
random) and cuts along a fixed interior direction instead.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .cone import Cone, cone_from_dict
from .errors import (
    BadParameter,
    DualDegenerate,
    EmptyResult,
    Infeasible,
    InitNoVertex,
    InitUnbounded,
    OracleUnavailable,
    Unbounded,
    UnboundedBelow,
)
from .polyhedron import CutReport, Halfspace, InnerPolyhedron, Polyhedron
from .problem import VCP, compile_p1, compile_p2
from .solvers import ScalarSolution, derive_dual_weight, p2_start, project_onto_inner, raw_dual_weight, solve
from .vselect import (
    ProjectionCache,
    fill_cache,
    hausdorff,
    hausdorff_bruteforce,
    refresh_cache,
    select_vertex,
)

log = logging.getLogger(__name__)

CONVERGED, MAXITER = "Converged", "MaxIter"
LOG_COLUMNS = [
    "iter",
    "n_outer_vertices",
    "n_inner_vertices",
    "d_H",
    "z_star",
    "qp_solved",
    "qp_skipped",
    "scalarizations_total",
    "wallclock_ms",
]
_MODE_ALIASES = {"vs": "vs", "first": "first", "baseline_first": "first", "random": "random", "baseline_random": "random"}


@dataclass
class RunConfig:
    epsilon: float = 0.05
    max_iter: int = 1000
    mode: str = "vs"
    seed: int | None = None
    tol: Tolerances = DEFAULT_TOL
    jobs: int = 1
    audit_skips: bool = False
    timing: bool = False  # wallclock_ms stays empty unless enabled, keeping logs reproducible
    log_path: str | None = None
    callback: Callable[["ApproxState"], None] | None = None

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise BadParameter("epsilon must be a positive number")
        if int(self.max_iter) < 1:
            raise BadParameter("max_iter must be at least 1")
        if self.mode not in _MODE_ALIASES:
            raise BadParameter(f"unknown mode {self.mode!r}")
        self.mode = _MODE_ALIASES[self.mode]
        if self.jobs < 1:
            raise BadParameter("jobs must be at least 1")


@dataclass
class CutRecord:
    """One second-scalarization solve: vertex ``v``, direction ``c``, weight ``w``."""

    v: np.ndarray
    c: np.ndarray
    w: np.ndarray
    z: float
    x: np.ndarray
    applied: bool
    wc_raw: float = 1.0  # w.c of the recovered multipliers before rescaling

    @property
    def gamma(self) -> float:
        return float(self.w @ self.v + self.z)


@dataclass
class ApproxState:
    outer: Polyhedron
    inner: InnerPolyhedron
    X: list[tuple[np.ndarray, np.ndarray]]
    cache: ProjectionCache
    inner_x: list[np.ndarray] = field(default_factory=list)  # preimages of the inner vertices
    d_H: float = math.nan
    k: int = 0
    scalarizations: int = 0
    cuts: list[CutRecord] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)
    barred: dict[int, float] = field(default_factory=dict)
    void_cuts: int = 0
    t0: float = field(default_factory=time.perf_counter)


class _LogSink:
    def __init__(self, path: str | None, timing: bool):
        self.timing = timing
        self._fh = open(path, "w", newline="") if path else None
        if self._fh:
            self._w = csv.writer(self._fh)
            self._w.writerow(LOG_COLUMNS)
            self._fh.flush()

    def record(self, state: ApproxState, z_star: float | None) -> None:
        row = {
            "iter": state.k,
            "n_outer_vertices": int(state.outer.vertex_ids().size),
            "n_inner_vertices": len(state.inner),
            "d_H": state.d_H,
            "z_star": z_star,
            "qp_solved": state.cache.last_solved,
            "qp_skipped": state.cache.last_skipped,
            "scalarizations_total": state.scalarizations,
            "wallclock_ms": (time.perf_counter() - state.t0) * 1e3 if self.timing else None,
        }
        state.log.append(row)
        if self._fh:
            self._w.writerow(_csv_cells(row))
            self._fh.flush()

    def close(self):
        if self._fh:
            self._fh.close()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_cells(row: dict) -> list[str]:
    return [_fmt(row[c]) for c in LOG_COLUMNS]


def log_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(LOG_COLUMNS)
    for r in rows:
        w.writerow(_csv_cells(r))
    return buf.getvalue()


# -- building blocks ----------------------------------------------------------


def initialize(vcp: VCP, config: RunConfig | None = None, fill: bool = True) -> ApproxState:
    """Weighted-sum solves along every dual generator give the first outer/inner pair."""
    config = config or RunConfig()
    cone = vcp.cone
    hs, X = [], []
    for j in range(cone.Z.shape[1]):
        z = cone.Z[:, j]
        try:
            sol = solve(compile_p1(vcp, z), tol_gap=config.tol.gap)
        except Unbounded as exc:
            raise InitUnbounded(f"weighted-sum problem for generator {j} is unbounded") from exc
        Fx = vcp.F(sol.x)
        X.append((sol.x, Fx))
        hs.append(Halfspace.make(z, float(z @ Fx)))
    try:
        outer = Polyhedron.from_halfspaces(hs, cone, tol=config.tol.geom)
    except (UnboundedBelow, Infeasible) as exc:
        raise InitNoVertex(str(exc)) from exc
    inner = InnerPolyhedron(np.zeros((0, cone.dim)), cone, tol_dedupe=config.tol.dedupe)
    inner_x = [x for x, F in X if inner.add_point(F)]
    state = ApproxState(
        outer=outer, inner=inner, X=X, cache=ProjectionCache(), inner_x=inner_x, scalarizations=len(X)
    )
    if fill:
        fill_cache(state.cache, outer, inner, jobs=config.jobs)
        state.d_H = hausdorff(state.cache)
    return state


def _solve_p2(vcp: VCP, v, c, tol: Tolerances, x_seed=None) -> tuple[ScalarSolution, np.ndarray, np.ndarray]:
    def attempt(c):
        sp = compile_p2(vcp, v, c)
        start = p2_start(sp, x_seed) if x_seed is not None and sp.kind != "LP" else None
        return sp, solve(sp, start=start, tol_gap=tol.gap)

    try:
        sp, sol = attempt(c)
    except Infeasible:
        # no strictly feasible start along c; nudge c into the interior of the cone
        c = c + 1e-6 * np.linalg.norm(c) * vcp.cone.interior_direction()
        sp, sol = attempt(c)
    try:
        w = derive_dual_weight(sol, vcp.cone, c, tol.kkt)
    except DualDegenerate:
        if sp.kind == "LP":
            raise
        sol = solve(sp, tol_gap=tol.gap * 1e-3)
        w = derive_dual_weight(sol, vcp.cone, c, tol.kkt)
    return sol, w, c


def _apply(state: ApproxState, vcp: VCP, v, c, config: RunConfig, cut_threshold: float, x_seed=None):
    sol, w, c = _solve_p2(vcp, v, c, config.tol, x_seed)
    state.scalarizations += 1
    z = float(sol.z)
    Fx = vcp.F(sol.x)
    state.X.append((sol.x, Fx))
    applied = z > cut_threshold
    if applied:
        try:
            report = state.outer.add_halfspace(Halfspace.make(w, float(w @ v) + z))
        except EmptyResult as exc:
            raise EmptyResult(f"iteration {state.k + 1}: {exc}") from exc
    else:
        report = CutReport(kept=[int(i) for i in state.outer.vertex_ids()])
    wc_raw = float(raw_dual_weight(sol, vcp.cone) @ c)
    state.cuts.append(CutRecord(np.array(v, dtype=float), c, w, z, sol.x, applied, wc_raw))
    added = state.inner.add_point(Fx)
    if added:
        state.inner_x.append(sol.x)
    return z, report, added


def iterate_vs(state: ApproxState, vcp: VCP, config: RunConfig) -> float:
    """One refinement step at the farthest vertex; returns ``z*``."""
    eligible_excluded = {vid for vid, d in state.barred.items() if vid in state.cache.entries and state.cache.entries[vid].dist == d}
    vid, s, p, _ = select_vertex(state.cache, exclude=eligible_excluded)
    # the projection's convex weights give a preimage x with F(x) <= p, a feasible start
    lam = state.cache.entries[vid].lam
    x_seed = sum(l * x for l, x in zip(lam, state.inner_x) if l > 0)
    z, report, added = _apply(state, vcp, s, p - s, config, config.tol.cut, x_seed)
    if report.redundant:
        state.barred[vid] = state.cache.entries[vid].dist
        state.void_cuts += 1
        log.info("iteration %d: void cut at vertex %d (z*=%.3g)", state.k + 1, vid, z)
    refresh_cache(
        state.cache, report, state.X[-1][1], added, state.outer, state.inner,
        tol_kkt=config.tol.kkt, jobs=config.jobs, audit=config.audit_skips,
    )
    state.barred = {k: d for k, d in state.barred.items() if k in state.cache.entries}
    state.d_H = hausdorff(state.cache)
    state.k += 1
    return z


# -- runs -----------------------------------------------------------------------


@dataclass
class RunResult:
    status: str
    epsilon: float
    iterations: int
    d_H: float
    X: list[tuple[np.ndarray, np.ndarray]]
    outer_vertices: np.ndarray
    inner_vertices: np.ndarray
    outer_halfspaces: list[Halfspace]
    cone: Cone
    mode: str
    counters: dict
    log: list[dict] = field(default_factory=list)
    cuts: list[CutRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "d_H": self.d_H,
            "mode": self.mode,
            "X": [{"x": x.tolist(), "F": F.tolist()} for x, F in self.X],
            "outer_vertices": self.outer_vertices.tolist(),
            "inner_vertices": self.inner_vertices.tolist(),
            "outer_halfspaces": [{"w": h.w.tolist(), "gamma": h.gamma} for h in self.outer_halfspaces],
            "cone": self.cone.to_dict(),
            "counters": dict(self.counters),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunResult":
        cone = cone_from_dict(doc["cone"])
        q = cone.dim
        return cls(
            status=doc["status"],
            epsilon=float(doc["epsilon"]),
            iterations=int(doc["iterations"]),
            d_H=float(doc["d_H"]),
            X=[(np.asarray(e["x"], dtype=float), np.asarray(e["F"], dtype=float)) for e in doc["X"]],
            outer_vertices=np.asarray(doc["outer_vertices"], dtype=float).reshape(-1, q),
            inner_vertices=np.asarray(doc["inner_vertices"], dtype=float).reshape(-1, q),
            outer_halfspaces=[Halfspace(np.asarray(h["w"], dtype=float), float(h["gamma"])) for h in doc["outer_halfspaces"]],
            cone=cone,
            mode=doc.get("mode", "vs"),
            counters=dict(doc.get("counters", {})),
        )

    def outer(self) -> Polyhedron:
        return Polyhedron.from_halfspaces(self.outer_halfspaces, self.cone)

    def inner(self) -> InnerPolyhedron:
        return InnerPolyhedron(self.inner_vertices, self.cone)

    @property
    def log_csv(self) -> str:
        return log_to_csv(self.log)


def _result(state: ApproxState, config: RunConfig, status: str, extra: dict | None = None) -> RunResult:
    c = state.cache
    total = c.qp_solved + c.qp_skipped
    counters = {
        "scalarizations": state.scalarizations,
        "qp_solved": c.qp_solved,
        "qp_skipped": c.qp_skipped,
        "skip_rate": c.qp_skipped / total if total else 0.0,
        "void_cuts": state.void_cuts,
    }
    if config.audit_skips:
        counters["audited_skips"] = c.audited
        counters["audit_max_dev"] = c.audit_max
    counters.update(extra or {})
    return RunResult(
        status=status,
        epsilon=config.epsilon,
        iterations=state.k,
        d_H=float(state.d_H),
        X=list(state.X),
        outer_vertices=state.outer.vertices(),
        inner_vertices=state.inner.vertices(),
        outer_halfspaces=list(state.outer.halfspaces),
        cone=state.outer.cone,
        mode=config.mode,
        counters=counters,
        log=state.log,
        cuts=state.cuts,
    )


def run(vcp: VCP, config: RunConfig | None = None) -> RunResult:
    config = config or RunConfig()
    if config.mode != "vs":
        return run_baseline(vcp, config)
    sink = _LogSink(config.log_path, config.timing)
    try:
        state = initialize(vcp, config)
        sink.record(state, None)
        stalled = False
        while state.d_H > config.epsilon and state.k < config.max_iter:
            try:
                z = iterate_vs(state, vcp, config)
            except LookupError:
                stalled = True
                log.warning("every far vertex yields a void cut; stopping at d_H=%.3g", state.d_H)
                break
            sink.record(state, z)
            if config.callback:
                config.callback(state)
    finally:
        sink.close()
    status = CONVERGED if state.d_H <= config.epsilon else MAXITER
    return _result(state, config, status, {"stalled": stalled} if stalled else None)


def run_baseline(vcp: VCP, config: RunConfig) -> RunResult:
    """Arbitrary-vertex scheme: cut along a fixed interior direction until every vertex is resolved."""
    if config.mode not in ("first", "random"):
        raise BadParameter("run_baseline needs mode 'first' or 'random'")
    rng = np.random.default_rng(config.seed)
    sink = _LogSink(config.log_path, config.timing)
    c_hat = vcp.cone.interior_direction()
    try:
        state = initialize(vcp, config, fill=False)
        sink.record(state, None)
        resolved: set[int] = set()
        while True:
            open_ids = [int(i) for i in state.outer.vertex_ids() if int(i) not in resolved]
            if not open_ids or state.k >= config.max_iter:
                break
            vid = open_ids[0] if config.mode == "first" else open_ids[int(rng.integers(len(open_ids)))]
            v = state.outer.vertex(vid)
            x_seed = np.mean(state.inner_x, axis=0)
            z, report, _ = _apply(state, vcp, v, c_hat, config, config.epsilon, x_seed)
            if z <= config.epsilon or vid not in report.cut:
                resolved.add(vid)
            state.k += 1
            sink.record(state, z)
            if config.callback:
                config.callback(state)
        fill_cache(state.cache, state.outer, state.inner, jobs=config.jobs)
        state.d_H = hausdorff(state.cache)
    finally:
        sink.close()
    status = CONVERGED if not open_ids else MAXITER
    return _result(state, config, status)


# -- certification ----------------------------------------------------------------


@dataclass
class Certificate:
    d_H: float
    d_H_recomputed: float
    recompute_method: str
    oracle: bool = False
    n_samples: int = 0
    max_outer_violation: float | None = None
    max_inner_distance: float | None = None
    k: float | None = None
    max_shifted_distance: float | None = None
    passed: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def certify(
    result: RunResult,
    vcp: VCP,
    oracle=None,
    n_samples: int = 10_000,
    seed: int = 0,
    tol_outer: float = 1e-6,
    tol_shift: float = 1e-6,
    jobs: int = 1,
    require_oracle: bool = False,
) -> Certificate:
    """Independent checks of a finished run.

    The Hausdorff distance is recomputed from the stored vertex sets.  With a
    membership oracle for the upper image, sampled boundary points must lie
    in the outer set, within ``epsilon`` of the inner set, and inside the
    inner set shifted back by ``k * epsilon`` along the cone's central
    direction.
    """
    outer = result.outer()
    inner = result.inner()
    n_gen = len(inner) + inner.D.shape[1]
    if vcp.q <= 3 and n_gen <= 12:
        d_re, how = hausdorff_bruteforce(outer, inner), "enumeration"
    else:
        V, D = inner.vertices().T, inner.D
        d_re = max(project_onto_inner(V, D, s).dist for s in outer.vertices())
        how = "fresh active-set solves"
    cert = Certificate(d_H=result.d_H, d_H_recomputed=float(d_re), recompute_method=how)
    ok = abs(d_re - result.d_H) <= 1e-7 and d_re <= result.epsilon * (1 + 1e-9)
    if oracle is None:
        if require_oracle:
            raise OracleUnavailable("no analytic description of the upper image is available")
        cert.notes.append("no oracle: sampling checks skipped")
        cert.passed = bool(ok)
        return cert

    rng = np.random.default_rng(seed)
    Y = oracle.sample_boundary(n_samples, rng)
    W, g = outer.halfspace_arrays()
    viol = float(np.max(g[None, :] - Y @ W.T))
    V, D = inner.vertices().T, inner.D
    c_hat = vcp.cone.interior_direction()
    k = vcp.cone.infimizer_constant(c_hat)
    shift = k * result.epsilon * c_hat

    def dists(pts):
        return np.array([project_onto_inner(V, D, y).dist for y in pts])

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(len(Y)), jobs)
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            d_in = np.concatenate(list(ex.map(lambda ix: dists(Y[ix]), chunks)))
            d_sh = np.concatenate(list(ex.map(lambda ix: dists(Y[ix] + shift), chunks)))
    else:
        d_in = dists(Y)
        d_sh = dists(Y + shift)
    cert.oracle = True
    cert.n_samples = len(Y)
    cert.max_outer_violation = max(viol, 0.0)
    cert.max_inner_distance = float(d_in.max())
    cert.k = k
    cert.max_shifted_distance = float(d_sh.max())
    cert.passed = bool(
        ok
        and viol <= tol_outer
        and cert.max_inner_distance <= result.epsilon * (1 + 1e-9)
        and cert.max_shifted_distance <= tol_shift
    )
    return cert
