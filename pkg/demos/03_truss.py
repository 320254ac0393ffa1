"""Ten-bar truss: nodal displacement trade-offs under a fixed total load.

With loads of either sign the stress limits leave almost no room: the
upper image is close to a translated orthant and a handful of cuts closes
the gap.  Restricting loads to be nonnegative gives a richer front.
"""
from bensonvs import RunConfig, run
from bensonvs.instances import TrussParams, make_truss

for nonneg in (False, True):
    vcp = make_truss(TrussParams(nonneg_loads=nonneg))
    print("nonnegative loads" if nonneg else "loads of either sign")
    for eps in (0.5, 0.4, 0.3, 0.2):
        row = [f"  eps={eps:.1f}"]
        for mode in ("vs", "first"):
            res = run(vcp, RunConfig(epsilon=eps, mode=mode))
            row.append(f"{mode}: |X|={len(res.X):3d} d_H={res.d_H:.3g}")
        print("   ".join(row))
