"""
Detecting k-positivity with a see-saw
=====================================

The map X -> t Tr(X) I - X is k-positive exactly when t >= k.  The search
over rank-k vectors finds the threshold, and the classical positive map on
M_3 shows a violation at k = 2 only.
"""

import numpy as np

from choi_cones import SeeSawConfig, is_k_positive
from choi_cones.generators import choi3_map
from choi_cones.schmidt import witness_map

cfg = SeeSawConfig(restarts=16, seed=1)

n = 3
print(" t    k=1           k=2           k=3")
for t in np.arange(0.8, 3.3, 0.4):
    cells = []
    for k in (1, 2, 3):
        v = is_k_positive(witness_map(t, n), k, None, cfg)
        cells.append(f"{'VIOL' if v.violated else 'ok':4s} {v.achieved_min:+.3f}")
    print(f"{t:.1f}  " + "    ".join(cells))

# positive but not 2-positive; the rank-2 minimum is -1/(3 sqrt 3)
for k in (1, 2):
    v = is_k_positive(choi3_map(), k, None, cfg)
    print(f"choi3 k={k}: {v.status.value}, min {v.achieved_min:+.6f}")
print("closed form:", -1 / (3 * np.sqrt(3)))

# a violation comes with a witness vector of Schmidt rank <= k
v = is_k_positive(choi3_map(), 2, None, cfg)
print("witness singular values:", np.round(np.linalg.svd(v.point, compute_uv=False), 6))
