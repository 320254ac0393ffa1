"""Residual, l1 and squared l2 norm of a sparse regression, approximated together."""
import numpy as np

from bensonvs import RunConfig, run
from bensonvs.instances import make_elastic_net

vcp = make_elastic_net(m=8, n=5, seed=0)
res = run(vcp, RunConfig(epsilon=0.2, max_iter=500))
print(f"{res.status}: {len(res.X)} points, gap {res.d_H:.3f}, {res.counters['qp_skipped']} projections reused")

F = np.array([F for _, F in res.X])
order = np.argsort(F[:, 1])
print(f"{'residual':>10} {'l1':>8} {'l2^2':>8}  nonzeros")
for i in order[:: max(1, len(order) // 10)]:
    x = res.X[i][0]
    print(f"{F[i, 0]:10.4f} {F[i, 1]:8.4f} {F[i, 2]:8.4f}  {int(np.sum(np.abs(x) > 1e-6))}")
