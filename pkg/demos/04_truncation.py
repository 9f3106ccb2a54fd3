"""
Growing dimension: compressions and the D-norm
==============================================

Conjugations by m^{(1+eps)/2} e_m e_m^dagger measured against the diagonal
cyclic vector with entries m^{-(1+p)/2} have D-norm m^{eps-p}.  The sign of
eps - p decides whether the sequence goes to zero, stays put or blows up,
while the operator norm always grows.
"""

import numpy as np

from choi_cones import CyclicVector
from choi_cones.correspondence import choi_C
from choi_cones.generators import choi3_map
from choi_cones.positivity import SeeSawConfig, min_rank_k_form
from choi_cones.truncation import Subspace, adseq, compress, convergence_run, trend

for p, eps in [(2.0, 0.1), (1.0, 1.0), (0.5, 1.0)]:
    rows = convergence_run(adseq(p, eps, 64))
    err = max(abs(r.d_norm - r.m ** (eps - p)) / r.m ** (eps - p) for r in rows)
    print(f"p={p} eps={eps}: D-norm {trend([r.d_norm for r in rows]):12s} "
          f"cb proxy {trend([r.cb_running_max for r in rows]):12s} max rel err {err:.1e}")

print("\n m   d_norm        unit_gap")
for r in convergence_run(adseq(2.0, 0.1, 8)):
    print(f"{r.m:2d}  {r.d_norm:.6e}  {r.unit_gap:.6e}")

# compressing a positive map's Choi matrix to a 2-dim subspace keeps positivity
rng = np.random.default_rng(5)
x0 = CyclicVector.random(rng, 3)
f = Subspace.random(rng, 3, 2)
small = compress(choi_C(choi3_map(), x0), f, x0)
v = min_rank_k_form(small, 1, SeeSawConfig(restarts=8), dims=(2, 2))
print("\ncompressed choi3, product-vector minimum:", round(v.achieved_min, 10))
print("compressed choi3, lowest eigenvalue:", round(float(np.linalg.eigvalsh(small)[0]), 6))
