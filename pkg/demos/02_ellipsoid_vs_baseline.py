"""Farthest-vertex selection against the first-vertex baseline on two ellipsoids."""
import time

from bensonvs import RunConfig, run
from bensonvs.instances import make_ellipsoid

print(f"{'a':>3} {'mode':>6} {'|X|':>5} {'proj':>6} {'reused':>8} {'d_H':>8} {'sec':>6}")
for a in (5.0, 7.0):
    vcp = make_ellipsoid(a)
    for mode in ("vs", "first"):
        t0 = time.perf_counter()
        res = run(vcp, RunConfig(epsilon=0.05, mode=mode, jobs=4))
        c = res.counters
        print(f"{a:3g} {mode:>6} {len(res.X):5d} {c['qp_solved']:6d} {c['qp_skipped']:8d} {res.d_H:8.4f} {time.perf_counter() - t0:6.1f}")
