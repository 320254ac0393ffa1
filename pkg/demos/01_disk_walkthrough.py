"""Unit disk, identity objectives: every step has a closed form to compare with."""
import numpy as np

from bensonvs import RunConfig, initialize, iterate_vs
from bensonvs.instances import make_disk

vcp = make_disk()
cfg = RunConfig(epsilon=0.05)
state = initialize(vcp, cfg)

print("weighted-sum images:", [np.round(F, 6).tolist() for _, F in state.X])
print("outer vertex:", state.outer.vertices().round(6).tolist())
print(f"initial gap {state.d_H:.9f}  (sqrt(1/2) = {np.sqrt(0.5):.9f})")

while state.d_H > cfg.epsilon:
    z = iterate_vs(state, vcp, cfg)
    x, F = state.X[-1]
    print(f"iter {state.k}: z*={z:.6f}  new point {np.round(F, 6)}  |x|={np.linalg.norm(x):.9f}  gap {state.d_H:.4f}")

print(f"done after {state.k} cuts with {len(state.X)} points")
