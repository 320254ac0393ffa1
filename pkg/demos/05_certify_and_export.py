"""Certify an ellipsoid run with sampled boundary points, then write an OFF mesh."""
import sys
import tempfile
from pathlib import Path

from bensonvs import RunConfig, certify, run
from bensonvs.export import result_off
from bensonvs.instances import make_ellipsoid, oracle_for

vcp = make_ellipsoid(7)
res = run(vcp, RunConfig(epsilon=0.1, jobs=4))
cert = certify(res, vcp, oracle=oracle_for(vcp), n_samples=2000, jobs=4)
for key, val in cert.to_dict().items():
    print(f"{key:>22}: {val}")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.gettempdir()) / "ellipsoid_inner.off"
out.write_text(result_off(res, which="inner"))
print("mesh written to", out)
