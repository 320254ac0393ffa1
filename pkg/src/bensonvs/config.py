"""Numerical tolerances used throughout the solver."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

TOL_GEOM = 1e-9
TOL_DEDUPE = 1e-7
TOL_KKT = 1e-8
TOL_FEAS = 1e-8
TOL_GAP = 1e-9
TOL_CUT = 1e-7


@dataclass(frozen=True)
class Tolerances:
    geom: float = TOL_GEOM  # exact-geometry comparisons (DD, cone tests)
    dedupe: float = TOL_DEDUPE  # inner-point deduplication
    kkt: float = TOL_KKT  # skip test and dual-weight checks
    feas: float = TOL_FEAS  # primal feasibility of scalar solves
    gap: float = TOL_GAP  # barrier duality gap
    cut: float = TOL_CUT  # z* below this means the cut is void

    def updated(self, **kw) -> "Tolerances":
        names = {f.name for f in fields(self)}
        unknown = set(kw) - names
        if unknown:
            raise ValueError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in kw.items() if v is not None})


DEFAULT_TOL = Tolerances()
